import itertools

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrations import fixtures
from fibrations.complex import (PresentationError, SncPresentation, betti, betti_table, build_dual_complex,
                                check_maximal_intersection, cone, stratification)


def rational_betti(d):
    """Independent oracle: ranks of the boundary maps via sympy."""
    ranks = {}
    for k in range(1, d.dimension + 1):
        ranks[k] = sympy.Matrix(d.boundary_matrix(k)).rank() if d.cells_of_dim(k) else 0
    return [len(d.cells_of_dim(k)) - ranks.get(k, 0) - ranks.get(k + 1, 0) for k in range(d.dimension + 1)]


@pytest.mark.parametrize("name,expected", [("k4", [1, 3]), ("three-cycle", [1, 1]),
                                           ("smooth-divisor", [1]), ("negative-vertex-divisor", [1, 0, 1])])
def test_fixture_betti_numbers(name, expected):
    d = build_dual_complex(fixtures.load(name))
    assert betti_table(d) == expected
    assert rational_betti(d) == expected


def test_k4_shape():
    d = build_dual_complex(fixtures.load("k4"))
    assert d.f_vector == (4, 6)
    assert d.euler_characteristic() == -2
    assert check_maximal_intersection(fixtures.load("k4"))


def test_two_curves_meeting_twice_make_a_circle():
    p = SncPresentation.from_dict({"n": 2, "components": ["A", "B"], "strata": [{"J": ["A", "B"], "count": 2}]})
    d = build_dual_complex(p)
    assert d.f_vector == (2, 2)
    assert betti(d, 1) == 1


def test_smooth_divisor_is_not_maximal():
    assert not check_maximal_intersection(fixtures.load("smooth-divisor"))


def test_boundary_squares_to_zero():
    d = build_dual_complex(fixtures.load("negative-vertex-divisor"))
    d1 = sympy.Matrix(d.boundary_matrix(1))
    d2 = sympy.Matrix(d.boundary_matrix(2))
    assert (d1 * d2).is_zero_matrix


def test_missing_substratum_rejected():
    with pytest.raises(PresentationError):
        build_dual_complex(SncPresentation.from_dict(
            {"n": 3, "components": ["A", "B", "C"], "strata": [{"J": ["A", "B", "C"], "count": 1}]}))


@pytest.mark.parametrize("bad", [
    {"n": 2, "components": ["A", "A"], "strata": []},
    {"n": 2, "components": ["A"], "strata": [{"J": ["A", "Z"], "count": 1}]},
    {"n": 1, "components": ["A", "B"], "strata": [{"J": ["A", "B"], "count": 1}]},
    {"n": 2, "components": ["A", "B"], "strata": [{"J": ["A", "B"], "count": -1}]},
])
def test_invalid_presentations(bad):
    with pytest.raises(PresentationError):
        SncPresentation.from_dict(bad)


def test_cone_is_contractible():
    for name in ("k4", "three-cycle", "negative-vertex-divisor"):
        d = build_dual_complex(fixtures.load(name))
        c = cone(d)
        assert c.dimension == d.dimension + 1
        assert c.euler_characteristic() == 1
        assert len(c.strata) == len(d.cells) + 1


def test_stratification_euler_matches_cells():
    d = build_dual_complex(fixtures.load("negative-vertex-divisor"))
    assert stratification(d).euler_characteristic() == d.euler_characteristic() == 2


@st.composite
def simplicial_presentations(draw):
    n_comp = draw(st.integers(2, 5))
    names = [f"Y{i}" for i in range(n_comp)]
    tops = draw(st.lists(st.lists(st.sampled_from(names), min_size=2, max_size=3, unique=True),
                         max_size=6))
    faces = set()
    for t in tops:
        for r in range(2, len(t) + 1):
            faces.update(tuple(sorted(f)) for f in itertools.combinations(t, r))
    return SncPresentation.from_dict({"n": 3, "components": names,
                                      "strata": [{"J": list(f), "count": 1} for f in sorted(faces)]})


@given(simplicial_presentations())
@settings(max_examples=60, deadline=None)
def test_euler_poincare(p):
    d = build_dual_complex(p)
    b = betti_table(d)
    assert sum((-1) ** k * x for k, x in enumerate(b)) == d.euler_characteristic()
    assert b == rational_betti(d)


@given(simplicial_presentations())
@settings(max_examples=30, deadline=None)
def test_presentation_round_trip(p):
    assert SncPresentation.from_dict(p.to_dict()) == p
