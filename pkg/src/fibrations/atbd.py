"""Almost toric base diagrams in two and three dimensions.

All coordinates are exact rationals. A node's branch cut is a ray from the
node in the primitive direction ``cut``. Its monodromy is the transvection

    T(w) = w + shear * det(w, eigen) * eigen

and the orientation convention is: a line that is straight in the affine
structure and has drawn direction ``w`` on the right of the cut (looking
along ``cut``) continues with drawn direction ``T(w)`` on the left.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from . import _intmat
from .groups import integer_kernel

Point = tuple[Fraction, Fraction]
Vec3 = tuple[Fraction, Fraction, Fraction]


class DiagramError(ValueError):
    pass


class DegenerateMutation(DiagramError):
    """The new branch cut would leave the polygon through a vertex."""


# -- small exact geometry -------------------------------------------------

def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        f = Fraction(x)
        if f.denominator > 1 << 20:
            raise DiagramError(f"{x!r} is not an exactly representable coordinate")
        return f
    return Fraction(x)


def _pt(p: Iterable) -> tuple[Fraction, ...]:
    return tuple(_frac(x) for x in p)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _scale(a, s):
    return tuple(x * s for x in a)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cross2(u, v) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def cross3(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def primitive(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray spanned by a nonzero rational vector."""
    fr = [_frac(x) for x in v]
    if all(x == 0 for x in fr):
        raise DiagramError("zero vector has no primitive direction")
    den = math.lcm(*(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints)


def is_lattice_point(p) -> bool:
    return all(_frac(x).denominator == 1 for x in p)


def affine_length(p: Sequence, q: Sequence) -> int:
    """Lattice points on the closed segment ``[p, q]`` minus one."""
    if not (is_lattice_point(p) and is_lattice_point(q)):
        raise DiagramError("affine length needs lattice endpoints")
    return math.gcd(*(int(_frac(b) - _frac(a)) for a, b in zip(p, q)))


def signed_area2(poly: Sequence[Point]) -> Fraction:
    return sum((cross2(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))), Fraction(0))


def _segments_cross(a, b, c, d) -> bool:
    """Closed segments [a, b] and [c, d] intersect."""
    d1 = cross2(_sub(b, a), _sub(c, a))
    d2 = cross2(_sub(b, a), _sub(d, a))
    d3 = cross2(_sub(d, c), _sub(a, c))
    d4 = cross2(_sub(d, c), _sub(b, c))
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on(p, q, r):
        return cross2(_sub(q, p), _sub(r, p)) == 0 and \
            min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])

    return (d1 == 0 and on(a, b, c)) or (d2 == 0 and on(a, b, d)) or \
        (d3 == 0 and on(c, d, a)) or (d4 == 0 and on(c, d, b))


def is_simple(poly: Sequence[Point]) -> bool:
    n = len(poly)
    if n < 3 or signed_area2(poly) == 0:
        return False
    if len(set(poly)) != n:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                return False
    return True


def is_convex(poly: Sequence[Point]) -> bool:
    n = len(poly)
    signs = {cross2(_sub(poly[(i + 1) % n], poly[i]), _sub(poly[(i + 2) % n], poly[(i + 1) % n]))
             > 0 for i in range(n)}
    return len(signs) == 1 and is_simple(poly)


def point_in_polygon(p: Point, poly: Sequence[Point]) -> int:
    """1 strictly inside, 0 on the boundary, -1 outside (exact)."""
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if cross2(_sub(b, a), _sub(p, a)) == 0 and \
                min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]):
            return 0
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return 1 if inside else -1


@dataclass(frozen=True)
class LatticeStats:
    area: Fraction
    interior: int
    boundary: int

    def pick_holds(self) -> bool:
        return self.area == self.interior + Fraction(self.boundary, 2) - 1


def lattice_stats(polygon: Sequence[Sequence]) -> LatticeStats:
    """Shoelace area, and interior/boundary lattice points counted directly."""
    poly = [tuple(_frac(x) for x in p) for p in polygon]
    if not is_simple(poly):
        raise DiagramError("polygon is not simple")
    if not all(is_lattice_point(p) for p in poly):
        raise DiagramError("lattice stats need lattice vertices")
    area = abs(signed_area2(poly)) / 2
    boundary = sum(affine_length(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly)))
    xs = [int(p[0]) for p in poly]
    ys = [int(p[1]) for p in poly]
    interior = sum(1 for x in range(min(xs), max(xs) + 1) for y in range(min(ys), max(ys) + 1)
                   if point_in_polygon((Fraction(x), Fraction(y)), poly) == 1)
    return LatticeStats(area, interior, boundary)


def edge_interior_points(p: Point, q: Point) -> list[Point]:
    n = affine_length(p, q)
    step = _scale(_sub(q, p), Fraction(1, n))
    return [_add(p, _scale(step, k)) for k in range(1, n)]


def transvection(eigen: Sequence[int], shear: int) -> _intmat.Matrix:
    a, b = eigen
    # w + k (w_x b - w_y a) (a, b)
    return ((1 + shear * a * b, -shear * a * a), (shear * b * b, 1 - shear * a * b))


# -- 2D diagrams -----------------------------------------------------------

@dataclass(frozen=True)
class Node:
    position: Point
    cut: tuple[int, int]
    eigen: tuple[int, int]
    shear: int = 1

    def __post_init__(self):
        object.__setattr__(self, "position", _pt(self.position))
        object.__setattr__(self, "cut", tuple(int(x) for x in self.cut))
        object.__setattr__(self, "eigen", tuple(int(x) for x in self.eigen))
        if math.gcd(*self.cut) != 1 or math.gcd(*self.eigen) != 1:
            raise DiagramError("cut and eigen-direction must be primitive integer vectors")
        if cross2(self.cut, self.eigen) != 0:
            raise DiagramError("eigen-direction must be parallel to the branch cut")

    @property
    def monodromy(self) -> _intmat.Matrix:
        return transvection(self.eigen, self.shear)


def _join_labels(a: str | None, b: str | None) -> str | None:
    if a is None or a == b:
        return b
    if b is None:
        return a
    return f"{a}∪{b}"


def _canonical_ring(points: list[Point], labels: list[str | None]) -> tuple[list[Point], list[str | None]]:
    """CCW orientation with collinear (straight-through) vertices removed."""
    if signed_area2(points) < 0:
        n = len(points)
        points = points[::-1]
        # reversed edge i joins points[i] -> points[i+1] = old (n-1-i) -> (n-2-i): old edge n-2-i
        labels = [labels[(n - 2 - i) % n] for i in range(n)]
    changed = True
    while changed and len(points) > 3:
        changed = False
        n = len(points)
        for i in range(n):
            prev, cur, nxt = points[i - 1], points[i], points[(i + 1) % n]
            if cross2(_sub(cur, prev), _sub(nxt, cur)) == 0 and _dot(_sub(cur, prev), _sub(nxt, cur)) > 0:
                merged = _join_labels(labels[i - 1], labels[i])
                del points[i]
                del labels[i]
                labels[(i - 1) % len(points)] = merged
                changed = True
                break
    # rotate so the lexicographically smallest vertex comes first
    k = min(range(len(points)), key=lambda i: points[i])
    return points[k:] + points[:k], labels[k:] + labels[:k]


@dataclass(frozen=True)
class AlmostToricDiagram2D:
    polygon: tuple[Point, ...]
    nodes: tuple[Node, ...] = ()
    edge_labels: tuple[str | None, ...] | None = None
    show_dots: bool = True

    def __post_init__(self):
        pts = [_pt(p) for p in self.polygon]
        if len(pts) < 3:
            raise DiagramError("a polygon needs at least three vertices")
        labels = list(self.edge_labels) if self.edge_labels is not None else [None] * len(pts)
        if len(labels) != len(pts):
            raise DiagramError("one edge label per edge")
        pts, labels = _canonical_ring(pts, labels)
        if not is_simple(pts):
            raise DiagramError("polygon is not simple")
        object.__setattr__(self, "polygon", tuple(pts))
        object.__setattr__(self, "edge_labels", tuple(labels))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        for node in self.nodes:
            if point_in_polygon(node.position, pts) != 1:
                raise DiagramError(f"node {node.position} is not inside the polygon")
        cuts = [(nd.position, self.cut_exit(i)) for i, nd in enumerate(self.nodes)]
        for (a, b), (c, d) in itertools.combinations(cuts, 2):
            if _segments_cross(a, b, c, d):
                raise DiagramError("branch cuts cross")

    @property
    def edges(self) -> list[tuple[Point, Point]]:
        n = len(self.polygon)
        return [(self.polygon[i], self.polygon[(i + 1) % n]) for i in range(n)]

    def cut_exit(self, node_index: int, direction: Sequence[int] | None = None) -> Point:
        """First boundary point hit by the ray from the node."""
        node = self.nodes[node_index]
        v = tuple(Fraction(x) for x in (direction if direction is not None else node.cut))
        return _ray_exit(node.position, v, self.polygon)[0]

    def lattice_stats(self) -> LatticeStats:
        return lattice_stats(self.polygon)

    def edge_lengths(self) -> list[int]:
        return [affine_length(a, b) for a, b in self.edges]

    def same_as(self, other: "AlmostToricDiagram2D") -> bool:
        """Equal polygons and nodes (positions and cut directions); labels ignored."""
        return self.polygon == other.polygon and \
            sorted((n.position, n.cut) for n in self.nodes) == sorted((n.position, n.cut) for n in other.nodes)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AlmostToricDiagram2D":
        nodes = tuple(Node(_pt(n["position"]), tuple(n["cut"]), tuple(n.get("eigen", n["cut"])),
                           int(n.get("shear", 1))) for n in data.get("nodes", []))
        labels = data.get("edge_labels")
        return cls(tuple(_pt(p) for p in data["polygon"]), nodes,
                   tuple(labels) if labels is not None else None, bool(data.get("show_dots", True)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "polygon": [[_num(x) for x in p] for p in self.polygon],
            "nodes": [{"position": [_num(x) for x in n.position], "cut": list(n.cut),
                       "eigen": list(n.eigen), "shear": n.shear} for n in self.nodes],
            "edge_labels": list(self.edge_labels),
            "show_dots": self.show_dots,
        }


def _num(x: Fraction) -> int | str:
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _ray_exit(p: Point, v: Sequence[Fraction], poly: Sequence[Point]) -> tuple[Point, int | None]:
    """Exit point of the ray ``p + t v`` (t > 0) and the vertex index if it is a vertex."""
    best: tuple[Fraction, Point] | None = None
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        e = _sub(b, a)
        den = cross2(v, e)
        if den == 0:
            continue
        w = _sub(a, p)
        t = cross2(w, e) / den
        s = cross2(w, v) / den
        if t > 0 and 0 <= s <= 1 and (best is None or t < best[0]):
            best = (t, _add(p, _scale(v, t)))
    if best is None:
        raise DiagramError("branch cut never reaches the boundary")
    q = best[1]
    vertex = next((i for i, x in enumerate(poly) if x == q), None)
    return q, vertex


def _affine_about(p: Point, m: _intmat.Matrix, x: Point) -> Point:
    return _add(p, _intmat.matvec(m, _sub(x, p)))


def mutate(d: AlmostToricDiagram2D, node_index: int) -> AlmostToricDiagram2D:
    """Move a node's cut to the opposite ray, re-charting the right half by the node monodromy.

    The polygon is split by the line through the node along its cut; the half
    on the right of the cut is moved by the monodromy fixing that line, the
    other half stays put.
    """
    if not d.nodes:
        return d
    node = d.nodes[node_index]
    poly = list(d.polygon)
    if not is_convex(poly):
        raise DiagramError("mutation is implemented for convex polygons")
    p, v = node.position, tuple(Fraction(x) for x in node.cut)
    if cross2(p, node.eigen) .denominator != 1:
        raise DiagramError("the eigenline of the node misses the lattice")
    neg_v = _scale(v, -1)
    _, vertex_hit = _ray_exit(p, neg_v, poly)
    if vertex_hit is not None:
        raise DegenerateMutation("new branch cut passes through a vertex")
    T = node.monodromy

    side = [cross2(v, _sub(x, p)) for x in poly]
    ring: list[tuple[Point, Fraction]] = []
    labels: list[str | None] = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        sa, sb = side[i], side[(i + 1) % n]
        ring.append((a, sa))
        labels.append(d.edge_labels[i])
        if sa * sb < 0:
            t = sa / (sa - sb)
            ring.append((_add(a, _scale(_sub(b, a), t)), Fraction(0)))
            labels.append(d.edge_labels[i])
    zeros = [i for i, (_, s) in enumerate(ring) if s == 0]
    if len(zeros) != 2:
        raise DiagramError("cut line does not split the polygon in two")
    i0, i1 = zeros
    chain1 = list(range(i0, i1 + 1))
    chain2 = list(range(i1, len(ring))) + list(range(0, i0 + 1))
    right_first = any(ring[k][1] < 0 for k in chain1)
    new_pts: list[Point] = []
    new_labels: list[str | None] = []
    for chain, is_right in ((chain1, right_first), (chain2, not right_first)):
        for k in chain[:-1]:
            x = ring[k][0]
            new_pts.append(_affine_about(p, T, x) if is_right else x)
            new_labels.append(labels[k])

    new_nodes = []
    for j, other in enumerate(d.nodes):
        if j == node_index:
            new_nodes.append(replace(other, cut=tuple(-x for x in other.cut)))
        elif cross2(v, _sub(other.position, p)) < 0:
            new_nodes.append(Node(_affine_about(p, T, other.position), _intmat.matvec(T, other.cut),
                                  _intmat.matvec(T, other.eigen), other.shear))
        else:
            new_nodes.append(other)
    return AlmostToricDiagram2D(tuple(new_pts), tuple(new_nodes), tuple(new_labels), d.show_dots)


def shear(d: AlmostToricDiagram2D, m: Sequence[Sequence[int]], t: Sequence = (0, 0)) -> AlmostToricDiagram2D:
    """Apply ``x -> m x + t`` with ``m`` in GL(2, Z)."""
    m = _intmat.as_matrix(m)
    if len(m) != 2 or not _intmat.is_unimodular(m):
        raise DiagramError("shear matrix must be a unimodular 2x2 integer matrix")
    t = _pt(t)
    pts = tuple(_add(_intmat.matvec(m, p), t) for p in d.polygon)
    nodes = tuple(Node(_add(_intmat.matvec(m, n.position), t), _intmat.matvec(m, n.cut),
                       _intmat.matvec(m, n.eigen), n.shear) for n in d.nodes)
    return AlmostToricDiagram2D(pts, nodes, d.edge_labels, d.show_dots)


def inverse_shear(m: Sequence[Sequence[int]], t: Sequence) -> tuple[_intmat.Matrix, Point]:
    minv = _intmat.inverse_unimodular(_intmat.as_matrix(m))
    return minv, tuple(-x for x in _intmat.matvec(minv, _pt(t)))


@dataclass(frozen=True)
class AffineTransform2D:
    m: _intmat.Matrix
    t: Point

    def to_dict(self) -> dict[str, Any]:
        return {"matrix": _intmat.to_json(self.m), "translation": [_num(x) for x in self.t]}


def find_agl_transform(a: AlmostToricDiagram2D, b: AlmostToricDiagram2D, bound: int = 6,
                       match_nodes: bool = True) -> AffineTransform2D | None:
    """Search ``x -> m x + t`` in AGL(2, Z) with entries of m bounded by ``bound`` taking a to b.

    Candidates come from sending one corner of ``a`` (with its two edge
    vectors) onto a corner of ``b`` in either orientation; each candidate is
    then verified on the whole vertex set and, optionally, on the nodes.
    """
    A, B = a.polygon, b.polygon
    if len(A) != len(B) or len(a.nodes) != len(b.nodes) and match_nodes:
        return None
    sa, sb = lattice_stats(A) if all(map(is_lattice_point, A)) else None, \
        lattice_stats(B) if all(map(is_lattice_point, B)) else None
    if sa != sb:
        return None
    n = len(A)
    E = ((A[1][0] - A[0][0], A[-1][0] - A[0][0]), (A[1][1] - A[0][1], A[-1][1] - A[0][1]))
    Einv = _intmat.inverse(E)
    targets = set(B)
    for j in range(n):
        for fwd, back in (((j + 1) % n, (j - 1) % n), ((j - 1) % n, (j + 1) % n)):
            f1, f2 = _sub(B[fwd], B[j]), _sub(B[back], B[j])
            F = ((f1[0], f2[0]), (f1[1], f2[1]))
            M = _intmat.matmul(F, Einv)
            if any(x.denominator != 1 for row in M for x in row):
                continue
            M = tuple(tuple(int(x) for x in row) for row in M)
            if _intmat.det(M) not in (1, -1) or any(abs(x) > bound for row in M for x in row):
                continue
            t = _sub(B[j], _intmat.matvec(M, A[0]))
            if {_add(_intmat.matvec(M, x), t) for x in A} != targets:
                continue
            if match_nodes and not shear(a, M, t).same_as(b):
                continue
            return AffineTransform2D(M, t)
    return None


# -- 3D diagram ------------------------------------------------------------

@dataclass(frozen=True)
class BranchPlane:
    point: Vec3
    line: Vec3  # boundary line direction; "upper" means positive along it
    span: Vec3  # the half-plane extends from the line in this direction
    from_side: Vec3  # normal pointing to the side the wall matrices map into


@dataclass(frozen=True)
class BaseDiagram3D:
    vertices: dict[str, Vec3] = field(hash=False)
    facets: dict[str, tuple[str, ...]] = field(hash=False)
    edges: dict[str, tuple[str, str]] = field(hash=False)
    glued_facets: dict[str, tuple[str, str, str]] = field(hash=False)
    excised_center: Vec3
    excised_radius: Fraction
    branch_plane: BranchPlane
    walls: dict[str, _intmat.Matrix] = field(hash=False)
    rays: tuple[tuple[Vec3, Vec3], ...]

    def __post_init__(self):
        for name, m in self.walls.items():
            if name not in ("upper", "lower"):
                raise DiagramError(f"unknown wall {name!r}")
            if len(m) != 3 or not _intmat.is_unimodular(m):
                raise DiagramError(f"wall matrix {name} is not in GL(3, Z)")
        pts = list(self.vertices.values())
        for name, vs in self.facets.items():
            n = self.facet_normal(name)
            level = _dot(n, self.vertices[vs[0]])
            if any(_dot(n, self.vertices[v]) != level for v in vs):
                raise DiagramError(f"facet {name} is not planar")
            signs = {(_dot(n, p) > level) - (_dot(n, p) < level) for p in pts} - {0}
            if len(signs) > 1:
                raise DiagramError(f"facet {name} is not a face of the convex hull")
        r2 = self.excised_radius ** 2
        for base, direction in self.rays:
            w = _sub(self.excised_center, base)
            t = _dot(w, direction) / _dot(direction, direction)
            if t <= 0:
                raise DiagramError("focus-focus ray points away from the excised ball")
            closest = _add(base, _scale(direction, t))
            gap = _sub(self.excised_center, closest)
            if _dot(gap, gap) >= r2:
                raise DiagramError("focus-focus ray misses the excised ball")

    def facet_normal(self, name: str) -> tuple[int, int, int]:
        vs = [self.vertices[v] for v in self.facets[name]]
        for a, b in itertools.combinations(range(1, len(vs)), 2):
            n = cross3(_sub(vs[a], vs[0]), _sub(vs[b], vs[0]))
            if any(n):
                return primitive(n)
        raise DiagramError(f"facet {name} is degenerate")

    def edge(self, e: str | Sequence[str]) -> tuple[Vec3, Vec3]:
        pair = self.edges[e] if isinstance(e, str) else tuple(e)
        return self.vertices[pair[0]], self.vertices[pair[1]]

    @property
    def split_ray(self) -> tuple[Vec3, Vec3]:
        bp = self.branch_plane
        for base, direction in self.rays:
            if _dot(bp.from_side, _sub(base, bp.point)) == 0 and _dot(bp.from_side, direction) == 0 \
                    and _dot(bp.line, direction) == 0:
                return base, direction
        raise DiagramError("no focus-focus ray lies in the branch plane")

    def region(self, x: Vec3) -> str:
        base, _ = self.split_ray
        return "upper" if _dot(_sub(x, base), self.branch_plane.line) > 0 else "lower"

    def apply_wall(self, wall: str, x: Vec3) -> Vec3:
        p = self.branch_plane.point
        return _add(p, _intmat.matvec(self.walls[wall], _sub(x, p)))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BaseDiagram3D":
        bp = data["branch_plane"]
        return cls(
            vertices={k: _pt(v) for k, v in data["vertices"].items()},
            facets={k: tuple(v) for k, v in data["facets"].items()},
            edges={k: (v[0], v[1]) for k, v in data.get("edges", {}).items()},
            glued_facets={k: (v["facets"][0], v["facets"][1], v["wall"])
                          for k, v in data.get("glued_facets", {}).items()},
            excised_center=_pt(data["excised"]["center"]),
            excised_radius=_frac(data["excised"]["radius"]),
            branch_plane=BranchPlane(_pt(bp["point"]), _pt(bp["line"]), _pt(bp["span"]),
                                     _pt(bp["from_side"])),
            walls={k: _intmat.as_matrix(v) for k, v in data["walls"].items()},
            rays=tuple((_pt(r["base"]), _pt(r["direction"])) for r in data["rays"]),
        )

    def to_dict(self) -> dict[str, Any]:
        v3 = lambda p: [_num(x) for x in p]  # noqa: E731
        bp = self.branch_plane
        return {
            "vertices": {k: v3(v) for k, v in self.vertices.items()},
            "facets": {k: list(v) for k, v in self.facets.items()},
            "edges": {k: list(v) for k, v in self.edges.items()},
            "glued_facets": {k: {"facets": [a, b], "wall": w} for k, (a, b, w) in self.glued_facets.items()},
            "excised": {"center": v3(self.excised_center), "radius": _num(self.excised_radius)},
            "branch_plane": {"point": v3(bp.point), "line": v3(bp.line), "span": v3(bp.span),
                             "from_side": v3(bp.from_side)},
            "walls": {k: _intmat.to_json(m) for k, m in self.walls.items()},
            "rays": [{"base": v3(b), "direction": v3(d)} for b, d in self.rays],
        }


def check_edge_colinearity(d: BaseDiagram3D, edge_a, edge_b, wall: str | _intmat.Matrix) -> bool:
    """Does the wall matrix send the primitive tangent of ``edge_a`` to that of ``edge_b``?"""
    a0, a1 = d.edge(edge_a)
    b0, b1 = d.edge(edge_b)
    if a0 == a1 or b0 == b1:
        raise DiagramError("zero-length edge")
    m = d.walls[wall] if isinstance(wall, str) else _intmat.as_matrix(wall)
    return _intmat.matvec(m, primitive(_sub(a1, a0))) == primitive(_sub(b1, b0))


def _hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row Hermite normal form of a full-row-rank integer matrix."""
    m = [list(r) for r in rows]
    r = 0
    for col in range(len(m[0])):
        if r == len(m):
            break
        while True:
            nz = [i for i in range(r, len(m)) if m[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(m[i][col]))
            m[r], m[piv] = m[piv], m[r]
            done = True
            for i in range(r + 1, len(m)):
                q = m[i][col] // m[r][col]
                m[i] = [x - q * y for x, y in zip(m[i], m[r])]
                done &= m[i][col] == 0
            if done:
                break
        if any(m[i][col] for i in range(r, len(m))):
            if m[r][col] < 0:
                m[r] = [-x for x in m[r]]
            for i in range(r):
                q = m[i][col] // m[r][col]
                m[i] = [x - q * y for x, y in zip(m[i], m[r])]
            r += 1
    return m


class _PlaneChart:
    """Integral affine coordinates on a lattice plane in R^3."""

    def __init__(self, origin: Vec3, normal: Sequence[int]):
        if _dot(normal, origin).denominator != 1:
            raise DiagramError("facet plane contains no lattice points")
        self.origin = origin
        self.normal = tuple(normal)
        basis = _hnf_rows([list(b) for b in integer_kernel([list(normal)])])
        self.basis = [tuple(Fraction(x) for x in b) for b in basis]
        b1, b2 = self.basis
        self._minor = next((i, j) for i, j in itertools.combinations(range(3), 2)
                           if b1[i] * b2[j] - b1[j] * b2[i] != 0)

    def coords(self, x: Vec3) -> Point:
        w = _sub(x, self.origin)
        if _dot(self.normal, w) != 0:
            raise DiagramError("point is off the facet plane")
        i, j = self._minor
        b1, b2 = self.basis
        a, b = _intmat.solve(((b1[i], b2[i]), (b1[j], b2[j])), (w[i], w[j]))
        return (a, b)

    def vector(self, v: Sequence) -> Point:
        return self.coords(_add(self.origin, _pt(v)))

    def lift(self, c: Sequence) -> Vec3:
        return _add(_scale(self.basis[0], c[0]), _scale(self.basis[1], c[1]))

    def restrict(self, m: _intmat.Matrix) -> _intmat.Matrix:
        cols = []
        for b in self.basis:
            img = _intmat.matvec(m, b)
            if _dot(self.normal, img) != 0:
                raise DiagramError("matrix does not preserve the facet plane")
            cols.append(self.vector(img))
        out = ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))
        if any(x.denominator != 1 for r in out for x in r):
            raise DiagramError("restricted matrix is not integral")
        return tuple(tuple(int(x) for x in r) for r in out)


def _shear_of(T: _intmat.Matrix, e: tuple[int, int]) -> int:
    for b in ((1, 0), (0, 1)):
        det_be = cross2(b, e)
        if det_be != 0:
            diff = _sub(_intmat.matvec(T, b), b)
            k = Fraction(diff[0], det_be * e[0]) if e[0] else Fraction(diff[1], det_be * e[1])
            if k.denominator == 1 and transvection(e, int(k)) == T:
                return int(k)
    raise DiagramError("node monodromy is not a transvection along its cut")


def facet_extract(d: BaseDiagram3D, name: str) -> AlmostToricDiagram2D:
    """2D diagram of a facet in integral coordinates of its own lattice plane."""
    inverse = {frozenset(v): k for k, v in d.edges.items()}

    def facet_ring(fname: str, mapper=None):
        vs = d.facets[fname]
        pts = [d.vertices[v] for v in vs]
        labels = [inverse.get(frozenset((vs[i], vs[(i + 1) % len(vs)]))) for i in range(len(vs))]
        if mapper is not None:
            pts = [mapper(p) for p in pts]
        return pts, labels

    glued = d.glued_facets.get(name)
    if glued is None and name not in d.facets:
        raise DiagramError(f"no facet named {name!r}")
    base_name = glued[0] if glued else name
    base_pts, base_labels = facet_ring(base_name)
    chart = _PlaneChart(base_pts[0], d.facet_normal(base_name))
    ring = [chart.coords(p) for p in base_pts]
    labels = base_labels
    other_ring: list[Point] = []
    if glued:
        _, other_name, wall = glued
        other_pts, other_labels = facet_ring(other_name, lambda p: d.apply_wall(wall, p))
        other_ring = [chart.coords(p) for p in other_pts]
        ring, labels = _merge_along_edge(ring, labels, other_ring, other_labels)

    diagram = AlmostToricDiagram2D(tuple(ring), (), tuple(labels))
    nodes = []
    for base, _direction in d.rays:
        if _dot(chart.normal, _sub(base, chart.origin)) != 0:
            continue
        pos = chart.coords(base)
        if point_in_polygon(pos, diagram.polygon) != 1:
            continue
        if glued:
            nodes.append(_seam_node(d, chart, pos, glued, other_ring))
        else:
            nodes.append(_ray_node(d, chart, pos, base))
    return AlmostToricDiagram2D(diagram.polygon, tuple(nodes), diagram.edge_labels)


def _merge_along_edge(p: list[Point], pl: list, q: list[Point], ql: list):
    def ccw(pts, labels):
        if signed_area2(pts) < 0:
            n = len(pts)
            return pts[::-1], [labels[(n - 2 - i) % n] for i in range(n)]
        return pts, labels

    p, pl = ccw(p, pl)
    q, ql = ccw(q, ql)
    n, m = len(p), len(q)
    for i in range(n):
        u, v = p[i], p[(i + 1) % n]
        for j in range(m):
            if q[j] == v and q[(j + 1) % m] == u:
                pts = [p[(i + 1 + k) % n] for k in range(n)]  # v ... u
                labs = [pl[(i + 1 + k) % n] for k in range(n - 1)]
                qs = [q[(j + 1 + k) % m] for k in range(m)]  # u ... v
                qlabs = [ql[(j + 1 + k) % m] for k in range(m - 1)]
                return pts[:-1] + qs[:-1], labs + qlabs
    raise DiagramError("glued facets do not share an edge")


def _seam_node(d: BaseDiagram3D, chart: _PlaneChart, pos: Point, glued, other_ring) -> Node:
    _, _, used = glued
    other = "lower" if used == "upper" else "upper"
    line2 = chart.vector(d.branch_plane.line)
    cut = primitive(line2 if other == "upper" else _scale(line2, -1))
    # crossing the cut from the base facet into the glued one changes drawn directions by D
    D3 = _intmat.matmul(d.walls[used], _intmat.inverse_unimodular(d.walls[other]))
    D = chart.restrict(D3)
    centroid = tuple(sum(c) / len(other_ring) for c in zip(*other_ring))
    glued_on_right = cross2(cut, _sub(centroid, pos)) < 0
    T = _intmat.inverse_unimodular(D) if glued_on_right else D
    return Node(pos, cut, cut, _shear_of(T, cut))


def _ray_node(d: BaseDiagram3D, chart: _PlaneChart, pos: Point, base: Vec3) -> Node:
    bp = d.branch_plane
    direction = cross3(chart.normal, bp.from_side)
    if _dot(direction, bp.span) < 0:
        direction = _scale(direction, -1)
    cut = primitive(chart.vector(direction))
    M = chart.restrict(d.walls[d.region(base)])
    right = (cut[1], -cut[0])
    to_side_on_right = _dot(bp.from_side, chart.lift(right)) < 0
    T = M if to_side_on_right else _intmat.inverse_unimodular(M)
    return Node(pos, cut, cut, _shear_of(T, cut))
