"""Free groups, one-relator style presentations and Smith normal form.

Words are written over the alphabet ``a, b, c, ...`` with upper case letters
standing for inverses, so ``"abAB"`` is the commutator ``a b a^-1 b^-1``.
Internally a word is a tuple of nonzero ints: generator ``i`` is ``i + 1`` and
its inverse is ``-(i + 1)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from ._intmat import Matrix, as_matrix, identity, matmul


class FreeWord:
    """An element of a free group, stored freely reduced."""

    __slots__ = ("letters",)

    def __init__(self, letters: Sequence[int] = ()):
        if any(x == 0 for x in letters):
            raise ValueError("letter 0 is not a generator")
        self.letters: tuple[int, ...] = _free_reduce(letters)

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        letters = []
        for ch in text.strip():
            if ch in " .*":
                continue
            if not ch.isalpha():
                raise ValueError(f"bad letter {ch!r} in word {text!r}")
            idx = ord(ch.lower()) - ord("a") + 1
            letters.append(idx if ch.islower() else -idx)
        return cls(letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return "".join(chr(ord("a") + abs(x) - 1) if x > 0 else chr(ord("A") + abs(x) - 1)
                       for x in self.letters)

    def __repr__(self) -> str:
        return f"FreeWord({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeWord) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def __pow__(self, k: int) -> "FreeWord":
        if k < 0:
            return self.inverse() ** (-k)
        return FreeWord(self.letters * k)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(-x for x in reversed(self.letters)))

    def conjugate_by(self, h: "FreeWord") -> "FreeWord":
        """Return ``h w h^-1``."""
        return h * self * h.inverse()

    def exponent_sums(self, ngens: int) -> tuple[int, ...]:
        sums = [0] * ngens
        for x in self.letters:
            if abs(x) > ngens:
                raise ValueError(f"word {self} uses more than {ngens} generators")
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(sums)

    def cyclic_reduction(self) -> tuple["FreeWord", "FreeWord"]:
        """Split as ``h * core * h^-1`` with ``core`` cyclically reduced."""
        w = self.letters
        i, j = 0, len(w)
        while j - i >= 2 and w[i] == -w[j - 1]:
            i += 1
            j -= 1
        return FreeWord(w[:i]), FreeWord(w[i:j])


def _free_reduce(letters: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def reduce(w: FreeWord | Sequence[int] | str) -> FreeWord:
    if isinstance(w, FreeWord):
        return FreeWord(w.letters)
    if isinstance(w, str):
        return FreeWord.parse(w)
    return FreeWord(w)


def is_proper_power(w: FreeWord) -> tuple[FreeWord, int] | None:
    """Return ``(root, k)`` with ``root**k == w`` and ``k >= 2`` maximal, else None.

    A cyclically reduced word is a proper power in a free group exactly when
    it is periodic as a string, so we test the divisors of the cyclic length.
    """
    if not w.letters:
        return None
    h, core = w.cyclic_reduction()
    n = len(core)
    for period in range(1, n // 2 + 1):
        if n % period:
            continue
        if core.letters == core.letters[:period] * (n // period):
            root = FreeWord(core.letters[:period]).conjugate_by(h)
            return root, n // period
    return None


def words_up_to(length: int, ngens: int = 2) -> Iterator[FreeWord]:
    """All reduced words of length <= ``length``, shortest first, deterministic order."""
    gens = [g for i in range(1, ngens + 1) for g in (i, -i)]
    frontier: list[tuple[int, ...]] = [()]
    yield FreeWord(())
    for _ in range(length):
        nxt = []
        for w in frontier:
            for g in gens:
                if w and w[-1] == -g:
                    continue
                nxt.append(w + (g,))
        for w in nxt:
            yield FreeWord(w)
        frontier = nxt


@dataclass(frozen=True)
class ConjugacySearch:
    """Outcome of a bounded search for ``w = h c^k h^-1``.

    ``found`` False means inconclusive, never a proof that no witness exists.
    """

    found: bool
    h: FreeWord | None
    k: int | None
    max_length: int

    @property
    def inconclusive(self) -> bool:
        return not self.found


def conjugate_power_search(w: FreeWord, c: FreeWord, max_length: int = 6,
                           ngens: int | None = None) -> ConjugacySearch:
    """Search conjugators ``h`` with ``|h| <= max_length`` such that ``h^-1 w h`` is a power of ``c``."""
    if ngens is None:
        ngens = max([abs(x) for x in w.letters + c.letters] + [2])
    if not c.letters:
        ok = not w.letters
        return ConjugacySearch(ok, FreeWord() if ok else None, 0 if ok else None, max_length)
    for h in words_up_to(max_length, ngens):
        u = h.inverse() * w * h
        if not u.letters:
            return ConjugacySearch(True, h, 0, max_length)
        for k in range(1, len(u) + 1):
            for kk in (k, -k):
                ck = c ** kk
                if ck == u:
                    return ConjugacySearch(True, h, kk, max_length)
            if len(c ** k) > len(u):
                break
    return ConjugacySearch(False, None, None, max_length)


@dataclass(frozen=True)
class Presentation:
    ngens: int
    relators: tuple[FreeWord, ...]

    @classmethod
    def parse(cls, ngens: int, relators: Sequence[str]) -> "Presentation":
        return cls(ngens, tuple(FreeWord.parse(r) for r in relators))

    def __post_init__(self):
        rels = []
        for r in self.relators:
            _, core = r.cyclic_reduction()
            core.exponent_sums(self.ngens)
            rels.append(core)
        object.__setattr__(self, "relators", tuple(rels))

    def exponent_matrix(self) -> Matrix:
        return tuple(r.exponent_sums(self.ngens) for r in self.relators)


@dataclass(frozen=True)
class IntMatrixSNF:
    """``U @ A @ V == D`` with U, V unimodular and D diagonal with d1 | d2 | ..."""

    A: Matrix
    U: Matrix
    V: Matrix
    D: Matrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> IntMatrixSNF:
    a = as_matrix(matrix)
    m = len(a)
    n = len(a[0]) if m else 0
    D = [list(r) for r in a]
    U = [list(r) for r in identity(m)]
    V = [list(r) for r in identity(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row dst += f * row src
        D[dst] = [x + f * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for M in (D, V):
            for row in M:
                row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not entries:
                break
            _, pi, pj = min(entries)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = D[i][t] // p
                if q:
                    add_row(i, t, -q)
                dirty |= D[i][t] != 0
            for j in range(t + 1, n):
                q = D[t][j] // p
                if q:
                    add_col(j, t, -q)
                dirty |= D[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if t < m and t < n and D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    as_t = lambda M: tuple(tuple(r) for r in M)  # noqa: E731
    return IntMatrixSNF(a, as_t(U), as_t(V), as_t(D))


def integer_kernel(matrix: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Basis of the saturated integer kernel ``{x in Z^n : A x = 0}``."""
    snf = smith_normal_form(matrix)
    ncols = len(snf.V)
    r = snf.rank
    return [tuple(snf.V[i][j] for i in range(ncols)) for j in range(r, ncols)]


@dataclass(frozen=True)
class Abelianization:
    torsion: tuple[int, ...]
    free_rank: int

    def __str__(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def abelianization(p: Presentation) -> Abelianization:
    if not p.relators:
        return Abelianization((), p.ngens)
    snf = smith_normal_form(p.exponent_matrix())
    diag = snf.diagonal
    torsion = tuple(d for d in diag if d > 1)
    return Abelianization(torsion, p.ngens - snf.rank)


def check_snf(snf: IntMatrixSNF) -> bool:
    """Verify the defining identities of a Smith normal form."""
    from ._intmat import det

    if snf.A and snf.A[0] and matmul(matmul(snf.U, snf.A), snf.V) != snf.D:
        return False
    if det(snf.U) not in (1, -1) or det(snf.V) not in (1, -1):
        return False
    D = snf.D
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            if i != j and x != 0:
                return False
    diag = snf.diagonal
    nz = [d for d in diag if d != 0]
    if any(d < 0 for d in diag) or diag[:len(nz)] != tuple(nz):
        return False
    return all(b % a == 0 for a, b in itertools.pairwise(nz))
