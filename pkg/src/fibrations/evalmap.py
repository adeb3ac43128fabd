"""The partition-of-unity evaluation map on the local model C^n.

The divisor is the union of coordinate hyperplanes, ``mu_i = |z_i|^2 / 2`` and
the simplex coordinates are ``chi_i = f(mu_i) / sum_j f(mu_j)``.

Both cutoffs use the C-infinity step ``s(t) = h(t) / (h(t) + h(1 - t))``
with ``h(t) = exp(-1/t)``:

* ``g(x) = x`` on ``[0, eps/3]``, ``(1 - s) x + s`` on the bridge with
  ``t = (x - eps/3) / (2 eps/3)``, and 1 from ``eps`` on. It is strictly
  increasing on ``[0, eps]`` whenever ``eps <= 1``.
* ``f(x) = 1 - s(x / eps)``: 1 for ``x <= 0`` and 0 for ``x >= eps``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq


class OutsideNeighbourhood(ValueError):
    """Every cutoff vanishes, so the point is not in the plumbing neighbourhood."""


class NoLevelCrossing(ValueError):
    pass


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _step_pair(t):
    """(s(t), 1 - s(t)) computed without cancellation."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _h(t), _h(1.0 - t)
    return a / (a + b), b / (a + b)


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def cutoff_g(x, eps: float = 1.0):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("cutoff_g is defined for x >= 0")
    s, one_minus_s = _step_pair((x - eps / 3) / (2 * eps / 3))
    out = np.where(x <= eps / 3, x, np.where(x >= eps, 1.0, one_minus_s * x + s))
    return _scalar_or_array(x, out)


def cutoff_f(x, eps: float = 1.0):
    x = np.asarray(x, dtype=float)
    _, one_minus_s = _step_pair(x / eps)
    out = np.where(x <= 0, 1.0, np.where(x >= eps, 0.0, one_minus_s))
    return _scalar_or_array(x, out)


@dataclass(frozen=True)
class LocalModel:
    n: int
    eps: float = 1.0
    eps_prime: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1] for g to be monotone")
        if self.eps_prime is None:
            object.__setattr__(self, "eps_prime", -float(self.n))
        if self.eps_prime >= 0:
            raise ValueError("the link level eps' must be negative")

    def mu(self, z) -> np.ndarray:
        return np.abs(np.asarray(z, dtype=complex)) ** 2 / 2

    def level(self, z) -> np.ndarray:
        """``sum_i log g(mu_i)``; the link is where this equals eps'."""
        mu = self.mu(z)
        with np.errstate(divide="ignore"):
            return np.sum(np.log(cutoff_g(mu, self.eps)), axis=-1)


@dataclass(frozen=True)
class SimplexPoint:
    """Barycentric coordinates; exact rationals, the last one is the complement."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        head = tuple(Fraction(c) for c in self.coords[:-1])
        object.__setattr__(self, "coords", head + (1 - sum(head, Fraction(0)),))
        if any(c < 0 or c > 1 for c in self.coords):
            raise ValueError("barycentric coordinates must lie in [0, 1]")

    def total(self) -> Fraction:
        return sum(self.coords, Fraction(0))

    def support(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.coords) if c > 0)

    def in_open_cell(self, J: Iterable[int]) -> bool:
        return self.support() == frozenset(J)

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords])


def chi(m: LocalModel, z: Sequence[complex]) -> SimplexPoint:
    f = cutoff_f(m.mu(z), m.eps)
    exact = [Fraction(float(v)) for v in np.atleast_1d(f)]
    total = sum(exact, Fraction(0))
    if total == 0:
        raise OutsideNeighbourhood("all cutoffs vanish")
    return SimplexPoint(tuple(v / total for v in exact))


def chi_array(m: LocalModel, z: np.ndarray) -> np.ndarray:
    """Floating-point chi for a batch of points, shape ``(N, n)``."""
    f = cutoff_f(m.mu(z), m.eps)
    total = f.sum(axis=-1, keepdims=True)
    if np.any(total == 0):
        raise OutsideNeighbourhood("all cutoffs vanish at some point")
    return f / total


def _radial_solve(m: LocalModel, weights: np.ndarray, target: float) -> float:
    """Radius r with ``sum log g(r^2 w_i / 2) = target`` for positive weights (brentq)."""
    if np.any(weights <= 0):
        raise NoLevelCrossing("direction has a zero coordinate")
    r_hi = math.sqrt(2 * m.eps / weights.min()) * 1.000001

    def F(r):
        return float(np.sum(np.log(cutoff_g(r * r * weights / 2, m.eps)))) - target

    r_lo = math.sqrt(2 * math.exp(target) * m.eps / weights.sum()) * 0.5
    while F(r_lo) > 0:
        r_lo *= 0.5
        if r_lo < 1e-300:
            raise NoLevelCrossing("no crossing found")
    return brentq(F, r_lo, r_hi, xtol=1e-300, maxiter=500)


def radial_solve_batch(m: LocalModel, weights: np.ndarray, target: float) -> np.ndarray:
    """Row-wise :func:`_radial_solve` by bisection in log r, all rows at once."""
    w = np.atleast_2d(weights)
    if np.any(w <= 0):
        raise NoLevelCrossing("direction has a zero coordinate")

    def F(r):
        with np.errstate(divide="ignore"):
            return np.sum(np.log(cutoff_g(r[:, None] ** 2 * w / 2, m.eps)), axis=1) - target

    hi = np.log(np.sqrt(2 * m.eps / w.min(axis=1)) * 1.000001)
    lo = np.log(np.sqrt(2 * math.exp(target) * m.eps / w.sum(axis=1)) * 0.5)
    for _ in range(2000):
        bad = F(np.exp(lo)) > 0
        if not bad.any():
            break
        lo[bad] -= 1.0
    else:
        raise NoLevelCrossing("no crossing found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = F(np.exp(mid)) > 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(lo))):
            break
    return np.exp(0.5 * (lo + hi))


def _gaussian_directions(rng: np.random.Generator, count: int, k: int) -> np.ndarray:
    d = rng.standard_normal((count, k)) + 1j * rng.standard_normal((count, k))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def link_sample(m: LocalModel, count: int, seed: int = 0, tol: float = 1e-10) -> np.ndarray:
    """Points of the level set ``sum log g(mu_i) = eps'`` along random complex directions."""
    rng = np.random.default_rng(seed)
    dirs = _gaussian_directions(rng, count, m.n)
    out = radial_solve_batch(m, np.abs(dirs) ** 2, m.eps_prime)[:, None] * dirs
    res = np.abs(m.level(out) - m.eps_prime)
    if res.max(initial=0) > tol:
        raise NoLevelCrossing(f"level residual {res.max():.3g} exceeds {tol}")
    return out


def open_stratum_sample(m: LocalModel, J: Iterable[int], count: int, seed: int = 0,
                        tol: float = 1e-10) -> np.ndarray:
    """Points of the link in N°_J: ``f_j > 0`` exactly for j in J.

    Coordinates outside J get ``mu`` uniform in ``[eps, 2 eps]`` (so ``g = 1``
    there); the J-coordinates follow a random complex direction scaled onto the
    level set. Draws where some ``f(mu_j)`` vanishes in floating point (which
    includes every ``mu_j >= eps``) are rejected.
    """
    J = sorted(set(J))
    if not J or J[0] < 0 or J[-1] >= m.n:
        raise ValueError(f"J must be a nonempty subset of 0..{m.n - 1}")
    rng = np.random.default_rng(seed)
    rest = [i for i in range(m.n) if i not in J]
    chunks = []
    filled = 0
    while filled < count:
        batch = max(16, count - filled)
        dirs = _gaussian_directions(rng, batch, len(J))
        mu_rest = rng.uniform(m.eps, 2 * m.eps, (batch, len(rest)))
        phases = rng.uniform(0, 2 * np.pi, (batch, len(rest)))
        zJ = radial_solve_batch(m, np.abs(dirs) ** 2, m.eps_prime)[:, None] * dirs
        keep = np.all(cutoff_f(np.abs(zJ) ** 2 / 2, m.eps) > 0, axis=1)
        z = np.empty((int(keep.sum()), m.n), dtype=complex)
        z[:, J] = zJ[keep]
        z[:, rest] = np.sqrt(2 * mu_rest[keep]) * np.exp(1j * phases[keep])
        chunks.append(z)
        filled += len(z)
    out = np.concatenate(chunks)[:count]
    res = np.abs(m.level(out) - m.eps_prime)
    if res.max(initial=0) > tol:
        raise NoLevelCrossing(f"level residual {res.max():.3g} exceeds {tol}")
    return out


def neighbourhood_sample(m: LocalModel, count: int, seed: int = 0) -> np.ndarray:
    """Random points of N: each ``mu_i`` uniform in ``[0, 1.5 eps]``, at least one below 0.9 eps."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        mu = rng.uniform(0, 1.5 * m.eps, m.n)
        if mu.min() >= 0.9 * m.eps:
            continue
        out.append(np.sqrt(2 * mu) * np.exp(1j * rng.uniform(0, 2 * np.pi, m.n)))
    return np.array(out)


# -- Poisson brackets ------------------------------------------------------

def _real_gradients(fun, z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference d/dx_k and d/dy_k of a vector-valued function of z (batched)."""
    z = np.atleast_2d(z)
    n = z.shape[1]
    dx, dy = [], []
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = h
        dx.append((fun(z + e) - fun(z - e)) / (2 * h))
        e[k] = 1j * h
        dy.append((fun(z + e) - fun(z - e)) / (2 * h))
    return np.stack(dx, axis=-1), np.stack(dy, axis=-1)  # (N, outputs, n)


def poisson_bracket(fun, z: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Pairwise brackets ``{F_a, F_b}`` for ``omega = sum dx_k ^ dy_k``, shape ``(N, A, A)``."""
    dx, dy = _real_gradients(fun, z, h)
    return np.einsum("nak,nbk->nab", dx, dy) - np.einsum("nak,nbk->nab", dy, dx)


@dataclass(frozen=True)
class PoissonReport:
    chi_chi: float
    chi_g: float
    control: float

    @property
    def max_residual(self) -> float:
        return max(self.chi_chi, self.chi_g)

    def to_dict(self) -> dict[str, float]:
        return {"chi_chi": self.chi_chi, "chi_prod_g": self.chi_g, "control": self.control}


def poisson_check(m: LocalModel, z: np.ndarray, h: float = 1e-6) -> PoissonReport:
    """Largest |{chi_i, chi_j}| and |{chi_i, prod g(mu_k)}| over the given points.

    ``control`` is the estimate of ``{Re z_1, Im z_1}``, which should be 1.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))

    def funcs(w):
        c = chi_array(m, w)
        prod_g = np.prod(cutoff_g(m.mu(w), m.eps), axis=-1, keepdims=True)
        return np.concatenate([c, prod_g], axis=-1)

    B = poisson_bracket(funcs, z, h)
    n = m.n
    control = poisson_bracket(lambda w: np.stack([w[:, 0].real, w[:, 0].imag], axis=-1), z, h)
    return PoissonReport(float(np.max(np.abs(B[:, :n, :n]))), float(np.max(np.abs(B[:, :n, n]))),
                         float(np.mean(control[:, 0, 1])))


# -- fullness --------------------------------------------------------------

def kuhn_cell(weights: np.ndarray, k: int) -> tuple:
    """Cell of the degree-k Kuhn subdivision of the simplex containing the point.

    With partial sums ``y_i = k (w_1 + ... + w_i)`` the cell is determined by
    ``floor(y)`` and the order of the fractional parts; there are ``k^d`` cells
    for a d-simplex.
    """
    w = np.asarray(weights, dtype=float)
    y = np.cumsum(k * w[:-1])
    fl = np.minimum(np.floor(y), k - 1).astype(int)
    frac = y - fl
    return tuple(fl.tolist()) + tuple(np.argsort(frac, kind="stable").tolist())


def enumerate_kuhn_cells(d: int, k: int) -> set[tuple]:
    """All cells of the subdivision, found by testing one interior point per candidate."""
    cells = set()
    for fl in itertools.product(range(k), repeat=d):
        for perm in itertools.permutations(range(d)):
            frac = np.empty(d)
            for rank, i in enumerate(perm):
                frac[i] = (rank + 1) / (d + 1)
            y = np.array(fl) + frac
            if np.all(np.diff(np.concatenate([[0.0], y, [float(k)]])) > 0):
                cells.add(tuple(fl) + tuple(np.argsort(frac, kind="stable").tolist()))
    return cells


@dataclass(frozen=True)
class FullnessReport:
    J: tuple[int, ...]
    resolution: int
    samples: int
    hit: int
    total: int
    max_vertex_weight: tuple[float, ...]
    open_cell: bool

    @property
    def coverage(self) -> float:
        return self.hit / self.total

    def to_dict(self) -> dict[str, Any]:
        return {"J": list(self.J), "resolution": self.resolution, "samples": self.samples,
                "hit": self.hit, "total": self.total, "coverage": self.coverage,
                "max_vertex_weight": list(self.max_vertex_weight), "open_cell": self.open_cell}


def fullness_check(m: LocalModel, J: Iterable[int], resolution: int = 20, samples: int = 10_000,
                   seed: int = 0) -> FullnessReport:
    """Fraction of Kuhn cells of the open J-simplex hit by ev on samples of N°_J."""
    J = tuple(sorted(set(J)))
    if len(J) > m.n:
        raise ValueError("|J| exceeds n")
    pts = open_stratum_sample(m, J, samples, seed)
    c = chi_array(m, pts)
    outside = [i for i in range(m.n) if i not in J]
    open_cell = bool(np.all(c[:, list(J)] > 0) and np.all(c[:, outside] == 0))
    d = len(J) - 1
    cw = c[:, list(J)]
    hit = {kuhn_cell(w, resolution) for w in cw}
    return FullnessReport(J, resolution, samples, len(hit), resolution ** d,
                          tuple(float(x) for x in cw.max(axis=0)), open_cell)


def export_csv(m: LocalModel, z: np.ndarray, path) -> None:
    """Write sampled points and their simplex coordinates as CSV."""
    c = chi_array(m, z)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"re_z{i + 1}" for i in range(m.n)] + [f"im_z{i + 1}" for i in range(m.n)] +
                   [f"chi{i + 1}" for i in range(m.n)])
        for zi, ci in zip(z, c):
            w.writerow([repr(float(v)) for v in zi.real] + [repr(float(v)) for v in zi.imag] +
                       [repr(float(v)) for v in ci])
