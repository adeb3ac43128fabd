import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrations import fixtures
from fibrations._intmat import det, inverse_unimodular, matmul, transpose
from fibrations.atlas import (AffineAtlas, AtlasError, LoopError, LoopWord, check_duality,
                              cycle_generator_loop, find_conjugator, line_bundle_cycle_atlas, monodromy_lagr,
                              monodromy_nonarch, random_atlas, random_loop, random_unimodular)

MINUS_ID = ((-1, 0), (0, -1))


def float_monodromies(a, loop):
    """Oracle in floating point: straight products of the transition matrices."""
    c = loop.cells
    na = np.eye(a.n)
    la = np.eye(a.n)
    for i in range(1, len(c), 2):
        b_next = np.array(a.beta(c[i], c[i + 1]), dtype=float)
        b_prev = np.array(a.beta(c[i], c[i - 1]), dtype=float)
        na = b_next @ np.linalg.inv(b_prev) @ na
        la = np.linalg.inv(b_next).T @ b_prev.T @ la
    return na, la


def test_cubic_fixture_monodromy_is_minus_identity():
    a = fixtures.load("cubic-atlas")
    loop = cycle_generator_loop(a)
    lagr = monodromy_lagr(a, loop)
    P = find_conjugator(lagr, MINUS_ID)
    assert P is not None and det(P) in (1, -1)
    assert matmul(P, lagr) == matmul(MINUS_ID, P)
    assert monodromy_nonarch(a, loop) == transpose(inverse_unimodular(lagr))


def test_float_oracle_on_cubic():
    a = fixtures.load("cubic-atlas")
    loop = cycle_generator_loop(a)
    na, la = float_monodromies(a, loop)
    assert np.allclose(na, monodromy_nonarch(a, loop))
    assert np.allclose(la, monodromy_lagr(a, loop))


@pytest.mark.parametrize("degrees", [(1, 1, 1), (-1, -1, -1), (0, 0, 0, 0), (-2, -1, -2, -1), (1, 2, 3)])
def test_cycle_atlas_duality_and_oracle(degrees):
    a = line_bundle_cycle_atlas(degrees)
    loop = cycle_generator_loop(a)
    assert check_duality(a, loop)
    na, la = float_monodromies(a, loop)
    assert np.allclose(na, monodromy_nonarch(a, loop))
    assert np.allclose(la, monodromy_lagr(a, loop))


def test_base_change_conjugates():
    a = fixtures.load("cubic-atlas")
    loop = cycle_generator_loop(a)
    cells = list(loop.cells[:-1])
    moved = LoopWord(tuple(cells[2:] + cells[:2] + [cells[2]]))
    r0, r1 = monodromy_lagr(a, loop), monodromy_lagr(a, moved)
    # both conjugate to -id, and the trace is a base-point invariant
    assert sum(r0[i][i] for i in range(2)) == sum(r1[i][i] for i in range(2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_random_duality_and_functoriality(seed):
    rng = np.random.default_rng(seed)
    a = random_atlas(rng)
    g1, g2 = random_loop(a, rng), random_loop(a, rng)
    assert check_duality(a, g1)
    na, la = float_monodromies(a, g1)
    assert np.allclose(na, monodromy_nonarch(a, g1))
    assert np.allclose(la, monodromy_lagr(a, g1))
    for rho in (monodromy_nonarch, monodromy_lagr):
        assert rho(a, g1.reversed()) == inverse_unimodular(rho(a, g1))
        if g1.base == g2.base:
            assert rho(a, g1 + g2) == matmul(rho(a, g2), rho(a, g1))


def test_random_atlas_bounds():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = random_atlas(rng)
        assert a.n <= 4
        assert len(a.cone_cells) + len(a.star_cells) <= 12


def test_random_unimodular():
    rng = np.random.default_rng(2)
    for n in (1, 2, 3, 4):
        assert det(random_unimodular(rng, n)) in (1, -1)


def test_atlas_round_trip():
    a = fixtures.load("cubic-atlas")
    assert AffineAtlas.from_dict(a.to_dict()) == a
    assert a.to_dict() == fixtures.raw("cubic-atlas")


def test_non_unimodular_transition_rejected():
    with pytest.raises(AtlasError):
        AffineAtlas(2, ("L",), ("K",), {("L", "K"): ((2, 0), (0, 1))})


@pytest.mark.parametrize("cells", [("K1", "L12", "K2"), ("K1", "K2", "K1"), ("K1", "L23", "K1"), ("K1", "L12")])
def test_bad_loops(cells):
    a = fixtures.load("cubic-atlas")
    with pytest.raises(LoopError):
        monodromy_nonarch(a, LoopWord(cells))


def test_conjugator_none_when_traces_differ():
    assert find_conjugator(((1, 1), (0, 1)), MINUS_ID) is None


def test_conjugator_for_transvections():
    A = ((1, 1), (0, 1))
    B = ((1, 0), (-1, 1))
    P = find_conjugator(A, B)
    assert P is not None and matmul(P, A) == matmul(B, P)
