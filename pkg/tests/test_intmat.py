from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrations._intmat import det, identity, inverse, inverse_unimodular, is_unimodular, matmul
from fibrations.atlas import random_unimodular

square = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n))


@given(square)
@settings(max_examples=150)
def test_det_matches_sympy(a):
    assert det(a) == sympy.Matrix(a).det()


def test_det_with_fractions():
    assert det([[Fraction(1, 2), 1], [1, 2]]) == 0
    assert det([[Fraction(1, 2), 0], [0, 4]]) == 2


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
@settings(max_examples=100)
def test_inverse_unimodular(seed, n):
    a = random_unimodular(np.random.default_rng(seed), n)
    b = inverse_unimodular(a)
    assert matmul(a, b) == identity(n) == matmul(b, a)
    assert b == tuple(tuple(int(x) for x in row) for row in inverse(a))


@pytest.mark.parametrize("a", [((2, 0), (0, 1)), ((1, 2), (2, 4)), ((0,),), ((3, 1), (3, 1))])
def test_inverse_unimodular_rejects(a):
    with pytest.raises(ValueError):
        inverse_unimodular(a)


def test_is_unimodular():
    assert is_unimodular(((0, 1), (1, 0)))
    assert not is_unimodular(((2, 1), (1, 2)))
