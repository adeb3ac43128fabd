import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from shapely.geometry import Point as SPoint
from shapely.geometry import Polygon as SPolygon

from fibrations import fixtures
from fibrations._intmat import det
from fibrations.atbd import (AlmostToricDiagram2D, BaseDiagram3D, DegenerateMutation, DiagramError, Node,
                             affine_length, check_edge_colinearity, facet_extract, find_agl_transform,
                             inverse_shear, is_convex, lattice_stats, mutate, point_in_polygon, shear,
                             transvection)

F = Fraction
unimodular = st.lists(st.integers(-3, 3), min_size=4, max_size=4).map(
    lambda v: ((v[0], v[1]), (v[2], v[3]))).filter(lambda m: det(m) in (1, -1))
translations = st.tuples(st.integers(-5, 5), st.integers(-5, 5))
lattice_points = st.tuples(st.integers(-6, 6), st.integers(-6, 6))


def shapely_stats(poly):
    """Oracle: area and lattice point counts from shapely predicates."""
    P = SPolygon([(float(x), float(y)) for x, y in poly])
    xs = [int(p[0]) for p in poly]
    ys = [int(p[1]) for p in poly]
    inside = boundary = 0
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            q = SPoint(x, y)
            if P.boundary.distance(q) < 1e-12:
                boundary += 1
            elif P.contains(q):
                inside += 1
    return P.area, inside, boundary


def quad():
    return fixtures.load("paper-quadrilateral")


# -- lattice geometry ------------------------------------------------------

@given(lattice_points, lattice_points)
def test_affine_length_is_gcd(p, q):
    assume(p != q)
    assert affine_length(p, q) == math.gcd(q[0] - p[0], q[1] - p[1])


@given(lattice_points, lattice_points, unimodular, translations)
def test_affine_length_invariant(p, q, m, t):
    assume(p != q)

    def g(x):
        return (m[0][0] * x[0] + m[0][1] * x[1] + t[0], m[1][0] * x[0] + m[1][1] * x[1] + t[1])
    assert affine_length(g(p), g(q)) == affine_length(p, q)


def test_affine_length_needs_lattice_points():
    with pytest.raises(DiagramError):
        affine_length((0, 0), (F(1, 2), 0))


@given(st.lists(lattice_points, min_size=3, max_size=8, unique=True))
@settings(max_examples=80, deadline=None)
def test_pick_against_shapely(pts):
    hull = SPolygon([(float(x), float(y)) for x, y in pts]).convex_hull
    assume(hull.geom_type == "Polygon" and hull.area > 0)
    poly = [(int(x), int(y)) for x, y in list(hull.exterior.coords)[:-1]]
    s = lattice_stats(poly)
    area, inside, boundary = shapely_stats(poly)
    assert float(s.area) == pytest.approx(area)
    assert (s.interior, s.boundary) == (inside, boundary)
    assert s.pick_holds()


def test_point_in_polygon():
    sq = [(0, 0), (2, 0), (2, 2), (0, 2)]
    assert point_in_polygon((1, 1), sq) == 1
    assert point_in_polygon((2, 1), sq) == 0
    assert point_in_polygon((3, 1), sq) == -1


def test_transvection_fixes_eigenvector():
    for e in ((0, 1), (1, 1), (2, -1), (-1, 1)):
        T = transvection(e, 1)
        assert det(T) == 1
        assert (T[0][0] * e[0] + T[0][1] * e[1], T[1][0] * e[0] + T[1][1] * e[1]) == e


# -- 2D diagrams -----------------------------------------------------------

def test_canonical_form_orders_ccw_and_drops_collinear():
    d = AlmostToricDiagram2D(((0, 3), (0, 0), (2, 0), (4, 0), (4, 3)))
    assert d.polygon == ((0, 0), (4, 0), (4, 3), (0, 3))


def test_node_must_be_inside():
    with pytest.raises(DiagramError):
        AlmostToricDiagram2D(((0, 0), (1, 0), (0, 1)), (Node((5, 5), (1, 0), (1, 0)),))


def test_node_rejects_non_primitive_cut():
    with pytest.raises(DiagramError):
        Node((0, 0), (2, 0), (1, 0))


def test_crossing_cuts_rejected():
    n1 = Node((1, 1), (1, 0), (1, 0))
    n2 = Node((2, F(1, 2)), (0, 1), (0, 1))
    with pytest.raises(DiagramError):
        AlmostToricDiagram2D(((0, 0), (4, 0), (4, 4), (0, 4)), (n1, n2))


def test_paper_mutation_vertices():
    m = mutate(quad(), 0)
    assert set(m.polygon) == {(-3, 0), (1, 0), (4, 3), (0, 3)}
    assert m.nodes[0].position == (0, 1) and m.nodes[0].cut == (0, 1)


def test_paper_shear_to_rectangle():
    m = mutate(quad(), 0)
    r = shear(m, ((1, -1), (0, 1)), (3, 0))
    rect = fixtures.load("paper-rectangle")
    assert r.same_as(rect)
    assert r.cut_exit(0) == (0, 3)
    assert find_agl_transform(m, rect) is not None


def test_mutation_preserves_lattice_stats():
    q = quad()
    m = mutate(q, 0)
    assert q.lattice_stats() == m.lattice_stats()
    assert m.lattice_stats().area == 12 and m.lattice_stats().pick_holds()


def test_double_mutation_is_agl_equivalent():
    q = quad()
    assert find_agl_transform(mutate(mutate(q, 0), 0), q) is not None


def test_mutation_without_nodes_is_identity():
    d = AlmostToricDiagram2D(((0, 0), (1, 0), (0, 1)))
    assert mutate(d, 0) is d


def test_degenerate_mutation_rejected():
    # the flipped cut would run from (1, 1) into the corner (0, 0)
    d = AlmostToricDiagram2D(((0, 0), (2, 0), (2, 2), (0, 2)), (Node((1, 1), (1, 1), (1, 1)),))
    with pytest.raises(DegenerateMutation):
        mutate(d, 0)


@given(unimodular, translations)
@settings(max_examples=60, deadline=None)
def test_shear_inverse(m, t):
    q = quad()
    mi, ti = inverse_shear(m, t)
    assert shear(shear(q, m, t), mi, ti).same_as(q)


@given(unimodular, translations)
@settings(max_examples=60, deadline=None)
def test_mutation_commutes_with_agl(m, t):
    q = quad()
    a = mutate(shear(q, m, t), 0)
    b = shear(mutate(q, 0), m, t)
    if det(m) == 1:
        assert a.same_as(b)
    else:
        # a reflection swaps the side of the cut that gets re-charted
        assert find_agl_transform(a, b, bound=30) is not None
    assert a.lattice_stats() == q.lattice_stats()


@given(unimodular, translations)
@settings(max_examples=40, deadline=None)
def test_agl_search_recovers_transform(m, t):
    q = quad()
    tr = find_agl_transform(q, shear(q, m, t), bound=6)
    assert tr is not None
    assert shear(q, tr.m, tr.t).same_as(shear(q, m, t))


def test_round_trip_2d():
    for name in ("paper-quadrilateral", "paper-rectangle"):
        d = fixtures.load(name)
        assert AlmostToricDiagram2D.from_dict(d.to_dict()) == d


def test_fraction_serialisation():
    d = facet_extract(fixtures.load("negative-vertex-3d"), "B2")
    data = d.to_dict()
    assert data["nodes"][0]["position"] == ["1/2", "-5/2"]
    assert AlmostToricDiagram2D.from_dict(data) == d


# -- 3D diagram ------------------------------------------------------------

def d3():
    return fixtures.load("negative-vertex-3d")


def test_wall_images():
    d = d3()
    M1, M2 = d.walls["upper"], d.walls["lower"]

    def mv(m, v):
        return tuple(sum(a * b for a, b in zip(row, v)) for row in m)
    assert mv(M1, (0, -1, 0)) == (1, 0, 0)
    assert mv(M2, (0, -1, -1)) == (1, 0, 0)


def test_straight_edges():
    d = d3()
    assert check_edge_colinearity(d, "B'12", "B12", "upper")
    assert check_edge_colinearity(d, "B'14", "B14", "lower")
    assert not check_edge_colinearity(d, "B'12", "B12", "lower")


def test_corrupted_wall_breaks_straight_edge():
    data = fixtures.raw("negative-vertex-3d")
    data["walls"]["upper"] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert not check_edge_colinearity(BaseDiagram3D.from_dict(data), "B'12", "B12", "upper")


def test_b3_is_size_three_triangle():
    f = facet_extract(d3(), "B3")
    assert len(f.polygon) == 3 and f.edge_lengths() == [3, 3, 3] and not f.nodes
    assert f.lattice_stats().interior == 1


@pytest.mark.parametrize("name,nodes", [("B1", 0), ("B1'", 0), ("B2", 1), ("B4", 1), ("B3", 0)])
def test_facet_node_counts(name, nodes):
    assert len(facet_extract(d3(), name).nodes) == nodes


def test_glued_facet_matches_paper_quadrilateral():
    g = facet_extract(d3(), "B1∪B1'")
    q = quad()
    assert set(g.polygon) == set(q.polygon)
    assert g.lattice_stats() == q.lattice_stats()
    assert len(g.nodes) == 1 and g.nodes[0].position[0] == 0 and g.nodes[0].cut == (0, -1)


def test_facets_are_convex_lattice_polygons():
    d = d3()
    for name in list(d.facets) + list(d.glued_facets):
        f = facet_extract(d, name)
        assert is_convex(f.polygon) and f.lattice_stats().pick_holds()


def test_round_trip_3d():
    d = d3()
    assert BaseDiagram3D.from_dict(d.to_dict()).to_dict() == d.to_dict()


def test_non_unimodular_wall_rejected():
    data = fixtures.raw("negative-vertex-3d")
    data["walls"]["upper"] = [[2, 0, 0], [0, 1, 0], [0, 0, 1]]
    with pytest.raises(DiagramError):
        BaseDiagram3D.from_dict(data)
