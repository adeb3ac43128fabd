"""Small exact matrix helpers over the integers and rationals.

Matrices are tuples of row tuples. Nothing here touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = tuple[tuple[int, ...], ...]


def as_matrix(rows: Sequence[Sequence[int]]) -> Matrix:
    out = tuple(tuple(int(x) for x in row) for row in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def det(a) -> int | Fraction:
    """Determinant by fraction-free Bareiss elimination (exact)."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    ints = not any(isinstance(x, Fraction) for r in m for x in r)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num // prev if ints else num / prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def inverse(a) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse over the rationals by Gauss-Jordan."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(row[n:]) for row in m)


def inverse_unimodular(a: Matrix) -> Matrix:
    """Integer inverse by Euclidean row reduction of ``[a | I]`` to ``[I | a^-1]``."""
    n = len(a)
    m = [[int(x) for x in row] for row in a]
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def sub(r, s, q):  # row r -= q * row s
        m[r] = [x - q * y for x, y in zip(m[r], m[s])]
        u[r] = [x - q * y for x, y in zip(u[r], u[s])]

    for col in range(n):
        while True:
            rows = [r for r in range(col, n) if m[r][col]]
            if not rows:
                raise ValueError("matrix is not invertible over the integers")
            piv = min(rows, key=lambda r: abs(m[r][col]))
            m[col], m[piv] = m[piv], m[col]
            u[col], u[piv] = u[piv], u[col]
            for r in range(col + 1, n):
                if m[r][col]:
                    sub(r, col, m[r][col] // m[col][col])
            if not any(m[r][col] for r in range(col + 1, n)):
                break
        if abs(m[col][col]) != 1:
            raise ValueError("matrix is not invertible over the integers")
        if m[col][col] < 0:
            m[col] = [-x for x in m[col]]
            u[col] = [-x for x in u[col]]
    for col in reversed(range(n)):
        for r in range(col):
            if m[r][col]:
                sub(r, col, m[r][col])
    return tuple(tuple(row) for row in u)


def is_unimodular(a: Matrix) -> bool:
    return bool(a) and len(a) == len(a[0]) and det(a) in (1, -1)


def rank(rows) -> int:
    """Rank over Q by exact elimination."""
    m = [[Fraction(x) for x in row] for row in rows if any(row)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            if m[i][col] != 0:
                f = m[i][col] / m[r][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(a, b):
    """Solve a x = b exactly for square invertible ``a``."""
    inv = inverse(a)
    return tuple(sum(x * y for x, y in zip(row, b)) for row in inv)


def to_json(a) -> list[list[int]]:
    return [[int(x) for x in row] for row in a]
