"""Integral affine atlases on Cone(D(Y)) minus Z and their loop monodromy.

Charts come in two kinds: cone cells (top-dimensional cones, lattice N(L))
and star cells (open stars of codimension-one cones, lattice N(K)). An
incident pair (L, K) carries the lattice map ``beta[L, K]: N(L) -> N(K)``.

Matrices act on column vectors and compose right to left, so the step taken
first along a loop is the rightmost factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import _intmat
from ._intmat import Matrix, identity, inverse_unimodular, matmul, transpose
from .groups import integer_kernel


class AtlasError(ValueError):
    pass


class LoopError(AtlasError):
    pass


@dataclass(frozen=True)
class AffineAtlas:
    n: int
    cone_cells: tuple[str, ...]
    star_cells: tuple[str, ...]
    transitions: dict[tuple[str, str], Matrix] = field(hash=False)

    def __post_init__(self):
        cones, stars = set(self.cone_cells), set(self.star_cells)
        if len(cones) != len(self.cone_cells) or len(stars) != len(self.star_cells):
            raise AtlasError("duplicate cell ids")
        if cones & stars:
            raise AtlasError(f"ids used for both kinds of cell: {sorted(cones & stars)}")
        clean = {}
        for (L, K), m in self.transitions.items():
            if L not in cones or K not in stars:
                raise AtlasError(f"transition ({L}, {K}) must go from a cone cell to a star cell")
            m = _intmat.as_matrix(m)
            if len(m) != self.n or any(len(r) != self.n for r in m):
                raise AtlasError(f"transition ({L}, {K}) is not {self.n}x{self.n}")
            if not _intmat.is_unimodular(m):
                raise AtlasError(f"transition ({L}, {K}) is not in GL({self.n}, Z)")
            clean[(L, K)] = m
        object.__setattr__(self, "transitions", clean)
        for L in self.cone_cells:
            if not any(l == L for l, _ in clean):
                raise AtlasError(f"cone cell {L} meets no star cell")

    def incident(self, a: str, b: str) -> bool:
        return (a, b) in self.transitions or (b, a) in self.transitions

    def beta(self, L: str, K: str) -> Matrix:
        try:
            return self.transitions[(L, K)]
        except KeyError:
            raise LoopError(f"cells {L} and {K} are not incident") from None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AffineAtlas":
        trans = {(str(t["L"]), str(t["K"])): _intmat.as_matrix(t["matrix"])
                 for t in data["transitions"]}
        return cls(int(data["n"]), tuple(str(c) for c in data["cone_cells"]),
                   tuple(str(c) for c in data["star_cells"]), trans)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "cone_cells": list(self.cone_cells),
            "star_cells": list(self.star_cells),
            "transitions": [{"L": L, "K": K, "matrix": _intmat.to_json(m)}
                            for (L, K), m in sorted(self.transitions.items())],
        }


@dataclass(frozen=True)
class LoopWord:
    """Alternating star/cone cell sequence K0, L1, K2, ..., K_m = K0."""

    cells: tuple[str, ...]

    @property
    def base(self) -> str:
        return self.cells[0]

    def reversed(self) -> "LoopWord":
        return LoopWord(tuple(reversed(self.cells)))

    def __add__(self, other: "LoopWord") -> "LoopWord":
        if self.cells[-1] != other.cells[0]:
            raise LoopError("loops must share the base cell to concatenate")
        return LoopWord(self.cells + other.cells[1:])

    @classmethod
    def parse(cls, text: str | Sequence[str]) -> "LoopWord":
        if isinstance(text, str):
            text = [t.strip() for t in text.split(",") if t.strip()]
        return cls(tuple(text))


def validate_loop(a: AffineAtlas, gamma: LoopWord) -> None:
    cells = gamma.cells
    if not cells or len(cells) % 2 == 0:
        raise LoopError("a loop word has odd length and starts and ends on a star cell")
    if cells[0] != cells[-1]:
        raise LoopError("loop does not close up")
    stars, cones = set(a.star_cells), set(a.cone_cells)
    for i, c in enumerate(cells):
        expected = stars if i % 2 == 0 else cones
        if c not in expected:
            kind = "star" if i % 2 == 0 else "cone"
            raise LoopError(f"position {i} ({c}) should be a {kind} cell")
    for i in range(1, len(cells), 2):
        a.beta(cells[i], cells[i - 1])
        a.beta(cells[i], cells[i + 1])


def monodromy_nonarch(a: AffineAtlas, gamma: LoopWord) -> Matrix:
    """Product of ``beta[L, K_next] @ inverse(beta[L, K_prev])`` over the steps of the loop."""
    validate_loop(a, gamma)
    rho = identity(a.n)
    c = gamma.cells
    for i in range(1, len(c), 2):
        step = matmul(a.beta(c[i], c[i + 1]), inverse_unimodular(a.beta(c[i], c[i - 1])))
        rho = matmul(step, rho)
    return rho


def monodromy_lagr(a: AffineAtlas, gamma: LoopWord) -> Matrix:
    """Same traversal with each factor replaced by its contragredient on M(K)."""
    validate_loop(a, gamma)
    rho = identity(a.n)
    c = gamma.cells
    for i in range(1, len(c), 2):
        step = matmul(transpose(inverse_unimodular(a.beta(c[i], c[i + 1]))),
                      transpose(a.beta(c[i], c[i - 1])))
        rho = matmul(step, rho)
    return rho


def check_duality(a: AffineAtlas, gamma: LoopWord) -> bool:
    nonarch = monodromy_nonarch(a, gamma)
    lagr = monodromy_lagr(a, gamma)
    return nonarch == transpose(inverse_unimodular(lagr))


def find_conjugator(A: Matrix, B: Matrix, bound: int = 5) -> Matrix | None:
    """Search P in GL(n, Z) with entries in [-bound, bound] and ``P A P^-1 == B``.

    Solutions of ``P A = B P`` form a lattice; we enumerate small integer
    combinations of a basis of it and keep the first unimodular one.
    """
    n = len(A)
    # unknowns p[i][j] -> index i*n + j; equation (PA - BP)[r][s] = 0
    rows = []
    for r, s in itertools.product(range(n), repeat=2):
        row = [0] * (n * n)
        for k in range(n):
            row[r * n + k] += A[k][s]
            row[k * n + s] -= B[r][k]
        rows.append(row)
    basis = integer_kernel(rows)
    if not basis:
        return None
    if (2 * bound + 1) ** len(basis) > 5_000_000:
        raise ValueError("conjugator search space too large; lower the bound")
    fallback = None
    for coeffs in sorted(itertools.product(range(-bound, bound + 1), repeat=len(basis)),
                         key=lambda cs: (sum(map(abs, cs)), sum(c < 0 for c in cs), cs)):
        flat = [sum(c * b[k] for c, b in zip(coeffs, basis)) for k in range(n * n)]
        if any(abs(x) > bound for x in flat):
            continue
        P = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))
        d = _intmat.det(P)
        if d == 1:
            return P
        if d == -1 and fallback is None:
            fallback = P
    return fallback


def line_bundle_cycle_atlas(degrees: Sequence[int], names: Sequence[str] | None = None) -> AffineAtlas:
    """Rank-2 atlas for a cycle of curves Y_0, ..., Y_{m-1} with normal degrees ``degrees``.

    The star of Y_i is charted by the fan of the total space of O(d_i) over
    P^1: the zero section has ray (0, 1), the previous neighbour Y_{i-1} has
    ray (1, 0) and the next neighbour Y_{i+1} has ray (-1, -d_i). A cone
    chart N(L) for L = {i, i+1} uses the basis of L in sorted index order,
    and ``beta[L, K]`` sends each basis vector to the ray of that component.
    Which neighbour gets (1, 0) is a convention of this helper.
    """
    m = len(degrees)
    if m < 3:
        raise AtlasError("need a cycle of at least three curves")
    names = list(names) if names is not None else [str(i + 1) for i in range(m)]
    stars = [f"K{names[i]}" for i in range(m)]
    pairs = [tuple(sorted((i, (i + 1) % m))) for i in range(m)]
    cones = [f"L{names[i]}{names[j]}" for i, j in pairs]
    trans: dict[tuple[str, str], Matrix] = {}
    for i in range(m):
        prev, nxt = (i - 1) % m, (i + 1) % m
        rays = {i: (0, 1), prev: (1, 0), nxt: (-1, -degrees[i])}
        for L, (p, q) in zip(cones, pairs):
            if i in (p, q):
                cols = [rays[p], rays[q]]
                trans[(L, stars[i])] = tuple(tuple(cols[c][r] for c in range(2)) for r in range(2))
    return AffineAtlas(2, tuple(cones), tuple(stars), trans)


def cycle_generator_loop(a: AffineAtlas) -> LoopWord:
    """K_0, L_{01}, K_1, L_{12}, ..., K_0 for atlases built by :func:`line_bundle_cycle_atlas`."""
    m = len(a.star_cells)
    cells = []
    for i in range(m):
        cells.append(a.star_cells[i])
        cone = next(L for L in a.cone_cells
                    if (L, a.star_cells[i]) in a.transitions
                    and (L, a.star_cells[(i + 1) % m]) in a.transitions)
        cells.append(cone)
    cells.append(a.star_cells[0])
    return LoopWord(tuple(cells))


def random_unimodular(rng, n: int, steps: int = 6, bound: int = 3) -> Matrix:
    """Product of random elementary moves, with entries kept small."""
    m = [list(r) for r in identity(n)]
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        kind = rng.integers(3)
        if kind == 0 and n > 1:
            f = int(rng.choice([-1, 1]))
            new = [a + f * b for a, b in zip(m[i], m[j])]
            if max(map(abs, new)) <= bound:
                m[i] = new
        elif kind == 1:
            m[i] = [-a for a in m[i]]
        elif n > 1:
            m[i], m[j] = m[j], m[i]
    return tuple(tuple(int(x) for x in r) for r in m)


def random_atlas(rng, n: int | None = None, max_cells: int = 12) -> AffineAtlas:
    """Random atlas on a connected bipartite incidence graph with at most ``max_cells`` cells."""
    n = n if n is not None else int(rng.integers(1, 5))
    total = int(rng.integers(2, max_cells + 1))
    n_star = int(rng.integers(1, total))
    stars = [f"K{i}" for i in range(n_star)]
    cones = [f"L{i}" for i in range(total - n_star)]
    pairs: set[tuple[str, str]] = set()
    for i, L in enumerate(cones):
        # a spanning structure keeps the incidence graph connected
        pairs.add((L, stars[i % n_star]))
        pairs.add((L, stars[int(rng.integers(n_star))]))
    for L in cones:
        for K in stars:
            if rng.random() < 0.3:
                pairs.add((L, K))
    trans = {p: random_unimodular(rng, n) for p in sorted(pairs)}
    return AffineAtlas(n, tuple(cones), tuple(stars), trans)


def random_loop(a: AffineAtlas, rng, steps: int = 6) -> LoopWord:
    """Random walk from a star cell, closed up along a shortest path back."""
    nbrs: dict[str, list[str]] = {c: [] for c in a.cone_cells + a.star_cells}
    for L, K in sorted(a.transitions):
        nbrs[L].append(K)
        nbrs[K].append(L)
    start = a.star_cells[int(rng.integers(len(a.star_cells)))]
    walk = [start]
    for _ in range(2 * int(rng.integers(0, steps + 1))):
        options = nbrs[walk[-1]]
        if not options:
            break
        walk.append(options[int(rng.integers(len(options)))])
    if len(walk) % 2 == 0:
        walk.pop()
    prev = {walk[-1]: None}
    queue = [walk[-1]]
    while queue:
        cur = queue.pop(0)
        for nb in nbrs[cur]:
            if nb not in prev:
                prev[nb] = cur
                queue.append(nb)
    back = []
    cur = start
    while cur != walk[-1]:
        back.append(cur)
        cur = prev[cur]
    return LoopWord(tuple(walk + back[::-1]))
