"""Dual complexes of simple normal crossing presentations and their cones.

The geometry never enters: a presentation lists the components of the
divisor and, for every nonempty intersection ``Y_J``, how many connected
components ``Y_J^0`` has. Everything downstream is exact combinatorics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable

from . import _intmat


class PresentationError(ValueError):
    """The listed strata do not form a consistent stratification."""


@dataclass(frozen=True)
class Stratum:
    J: tuple[str, ...]
    count: int
    # incidence[c][i]: which component of Y_{J minus J[i]} contains component c of Y_J.
    # Only needed when a codimension-one face stratum has count > 1.
    incidence: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class SncPresentation:
    n: int
    components: tuple[str, ...]
    strata: tuple[Stratum, ...]

    def __post_init__(self):
        comps = tuple(str(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(set(comps)) != len(comps):
            raise PresentationError("duplicate component names")
        order = {c: i for i, c in enumerate(comps)}
        seen: dict[tuple[str, ...], Stratum] = {}
        for s in self.strata:
            if not s.J:
                raise PresentationError("empty stratum subset")
            if any(j not in order for j in s.J):
                raise PresentationError(f"stratum {s.J} names an unknown component")
            if len(set(s.J)) != len(s.J):
                raise PresentationError(f"stratum {s.J} repeats a component")
            if s.count < 0:
                raise PresentationError(f"negative count for {s.J}")
            if len(s.J) > self.n:
                raise PresentationError(f"|J| = {len(s.J)} exceeds n = {self.n} for {s.J}")
            if len(s.J) == 1 and s.count != 1:
                raise PresentationError(f"component {s.J[0]} must have count 1")
            key = tuple(sorted(s.J, key=order.__getitem__))
            if key in seen:
                raise PresentationError(f"stratum {key} listed twice")
            seen[key] = Stratum(key, s.count, s.incidence)
        strata = tuple(sorted(seen.values(), key=lambda s: (len(s.J), [order[j] for j in s.J])))
        object.__setattr__(self, "strata", strata)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SncPresentation":
        strata = []
        for s in data.get("strata", []):
            inc = s.get("incidence")
            strata.append(Stratum(tuple(str(j) for j in s["J"]), int(s["count"]),
                                  tuple(tuple(r) for r in inc) if inc is not None else None))
        return cls(int(data["n"]), tuple(data["components"]), tuple(strata))

    def to_dict(self) -> dict[str, Any]:
        strata = []
        for s in self.strata:
            entry: dict[str, Any] = {"J": list(s.J), "count": s.count}
            if s.incidence is not None:
                entry["incidence"] = [list(r) for r in s.incidence]
            strata.append(entry)
        return {"n": self.n, "components": list(self.components), "strata": strata}

    def count(self, J: Iterable[str]) -> int:
        J = tuple(J)
        if len(J) == 1:
            return 1 if J[0] in self.components else 0
        key = tuple(sorted(J, key=self.components.index))
        for s in self.strata:
            if s.J == key:
                return s.count
        return 0

    def stratum(self, J: tuple[str, ...]) -> Stratum | None:
        for s in self.strata:
            if s.J == J:
                return s
        return None


def check_maximal_intersection(p: SncPresentation) -> bool:
    if p.n == 1:
        return bool(p.components)
    return any(len(s.J) == p.n and s.count >= 1 for s in p.strata)


@dataclass(frozen=True)
class Cell:
    dim: int
    vertices: tuple[int, ...]  # component indices, increasing
    index: int  # which connected component of the stratum
    faces: tuple[int, ...]  # cell ids; faces[i] omits vertices[i]


@dataclass(frozen=True)
class DualComplex:
    components: tuple[str, ...]
    cells: tuple[Cell, ...]

    @property
    def dimension(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def cells_of_dim(self, d: int) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.dim == d]

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.cells_of_dim(d)) for d in range(self.dimension + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * f for d, f in enumerate(self.f_vector))

    def label(self, cell_id: int) -> str:
        c = self.cells[cell_id]
        name = "+".join(self.components[v] for v in c.vertices)
        multi = sum(1 for o in self.cells if o.vertices == c.vertices) > 1
        return f"{name}#{c.index}" if multi else name

    def boundary_matrix(self, k: int) -> list[list[int]]:
        """Matrix of the simplicial boundary C_k -> C_{k-1} (rows: (k-1)-cells)."""
        rows_ids = self.cells_of_dim(k - 1)
        cols_ids = self.cells_of_dim(k)
        pos = {cid: r for r, cid in enumerate(rows_ids)}
        mat = [[0] * len(cols_ids) for _ in rows_ids]
        if k <= 0:
            return mat
        for col, cid in enumerate(cols_ids):
            for i, f in enumerate(self.cells[cid].faces):
                mat[pos[f]][col] += (-1) ** i
        return mat

    @cached_property
    def _boundary_ranks(self) -> dict[int, int]:
        return {k: _intmat.rank(self.boundary_matrix(k)) for k in range(1, self.dimension + 1)}

    def to_dict(self) -> dict[str, Any]:
        return {
            "components": list(self.components),
            "cells": [
                {"id": i, "dim": c.dim, "label": self.label(i),
                 "vertices": [self.components[v] for v in c.vertices],
                 "index": c.index, "faces": list(c.faces)}
                for i, c in enumerate(self.cells)
            ],
            "f_vector": list(self.f_vector),
        }


def build_dual_complex(p: SncPresentation) -> DualComplex:
    """One vertex per component and one d-cell per connected component of each depth-(d+1) stratum."""
    order = {c: i for i, c in enumerate(p.components)}
    counts: dict[tuple[int, ...], int] = {(i,): 1 for i in range(len(p.components))}
    for s in p.strata:
        if len(s.J) > 1 and s.count > 0:
            counts[tuple(order[j] for j in s.J)] = s.count

    for J, c in counts.items():
        for r in range(2, len(J)):
            for K in itertools.combinations(J, r):
                if counts.get(K, 0) < 1:
                    names = [p.components[k] for k in K]
                    raise PresentationError(
                        f"stratum {[p.components[j] for j in J]} is nonempty but its "
                        f"sub-stratum {names} is not listed")

    keys = sorted(counts, key=lambda J: (len(J), J))
    ids: dict[tuple[tuple[int, ...], int], int] = {}
    cells: list[Cell] = []
    for J in keys:
        stratum = p.stratum(tuple(p.components[j] for j in J)) if len(J) > 1 else None
        inc = stratum.incidence if stratum is not None else None
        if inc is not None and len(inc) != counts[J]:
            raise PresentationError(f"incidence for {J} must have one row per component")
        for idx in range(counts[J]):
            faces = []
            if len(J) > 1:
                for i in range(len(J)):
                    K = J[:i] + J[i + 1:]
                    if inc is not None:
                        face_idx = inc[idx][i]
                    elif counts[K] == 1:
                        face_idx = 0
                    else:
                        names = [p.components[k] for k in K]
                        raise PresentationError(
                            f"face {names} of {[p.components[j] for j in J]} has "
                            f"{counts[K]} components; give an incidence table")
                    if not 0 <= face_idx < counts[K]:
                        raise PresentationError(f"incidence index {face_idx} out of range for {K}")
                    faces.append(ids[(K, face_idx)])
            ids[(J, idx)] = len(cells)
            cells.append(Cell(len(J) - 1, J, idx, tuple(faces)))
    return DualComplex(p.components, tuple(cells))


def betti(d: DualComplex, k: int) -> int:
    """Rank of H^k(d; Q), computed with exact rational elimination."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > d.dimension:
        return 0
    ranks = d._boundary_ranks
    dim_k = len(d.cells_of_dim(k))
    return dim_k - ranks.get(k, 0) - ranks.get(k + 1, 0)


def betti_table(d: DualComplex) -> list[int]:
    return [betti(d, k) for k in range(d.dimension + 1)]


@dataclass(frozen=True)
class StratifiedSpace:
    """Strata as ``(dimension, label)`` pairs plus the strict closure order.

    ``below[i]`` is the set of strata lying in the closure of stratum ``i``.
    """

    strata: tuple[tuple[int, str], ...]
    below: tuple[frozenset[int], ...]

    def __post_init__(self):
        for i, lower in enumerate(self.below):
            for j in lower:
                if self.strata[j][0] > self.strata[i][0]:
                    raise ValueError(f"closure order decreases dimension at {self.strata[i][1]}")
                if i in self.below[j]:
                    raise ValueError("closure order has a cycle")

    @property
    def dimension(self) -> int:
        return max((d for d, _ in self.strata), default=-1)

    def skeleton(self, d: int) -> set[int]:
        """Indices of strata in B_d; closed under the order by construction."""
        return {i for i, (dim, _) in enumerate(self.strata) if dim <= d}

    def euler_characteristic(self) -> int:
        """Euler characteristic of the order complex of the closure poset.

        For the face poset of a regular cell complex this is the usual Euler
        characteristic; for a cone the poset has a least element, giving 1.
        """
        order = sorted(range(len(self.strata)), key=lambda i: (self.strata[i][0], len(self.below[i])))
        # chains[i][m]: number of chains with m+1 elements whose top is i
        chains: dict[int, list[int]] = {}
        for i in order:
            acc = [1]
            for j in self.below[i]:
                for m, c in enumerate(chains[j]):
                    while len(acc) <= m + 1:
                        acc.append(0)
                    acc[m + 1] += c
            chains[i] = acc
        return sum((-1) ** m * c for acc in chains.values() for m, c in enumerate(acc))

    def to_dict(self) -> dict[str, Any]:
        return {"strata": [{"dim": d, "label": lab, "below": sorted(self.below[i])}
                           for i, (d, lab) in enumerate(self.strata)]}


def _closure(d: DualComplex) -> list[frozenset[int]]:
    below: list[frozenset[int]] = []
    for c in d.cells:
        acc: set[int] = set()
        for f in c.faces:
            acc.add(f)
            acc |= below[f]
        below.append(frozenset(acc))
    return below


def stratification(d: DualComplex) -> StratifiedSpace:
    return StratifiedSpace(tuple((c.dim, d.label(i)) for i, c in enumerate(d.cells)),
                           tuple(_closure(d)))


def cone(d: DualComplex) -> StratifiedSpace:
    """Cone point first, then one open (k+1)-cone per k-cell of ``d``."""
    base = _closure(d)
    strata = [(0, "cone point")] + [(c.dim + 1, f"cone({d.label(i)})") for i, c in enumerate(d.cells)]
    below = [frozenset()] + [frozenset({0} | {j + 1 for j in b}) for b in base]
    return StratifiedSpace(tuple(strata), tuple(below))
