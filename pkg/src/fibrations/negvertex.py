"""Critical points of the potential psi on the negative vertex.

W is the affine 3-fold ``xy = 1 + u1 + u2`` with ``u1, u2 != 0`` and

    psi = (X^2 + Y^2 + (R1 - c)^2 + (R2 - c)^2) / 2,

where ``x = X e^{i alpha}``, ``y = Y e^{i beta}``, ``u_j = e^{R_j + i theta_j}``.
Lagrange multipliers (lam, mu) impose Re and Im of the constraint
``G = xy - 1 - u1 - u2 = 0``; the Lagrangian is ``psi - lam Re G - mu Im G``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import null_space

LN2 = math.log(2.0)


class ConvergenceError(RuntimeError):
    pass


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class NegVertexConfig:
    c: float = -0.8
    residual_tol: float = 1e-9
    root_tol: float = 1e-15
    max_iter: int = 100
    flow_tol: float = 1e-6

    def __post_init__(self):
        if not -1.0 < self.c < -LN2:
            raise ValueError(f"c = {self.c} must lie in (-1, -ln 2)")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NegVertexConfig":
        return cls(**{k: data[k] for k in ("c", "residual_tol", "root_tol", "max_iter", "flow_tol")
                      if k in data})

    def to_dict(self) -> dict[str, Any]:
        return {"c": self.c, "residual_tol": self.residual_tol, "root_tol": self.root_tol,
                "max_iter": self.max_iter, "flow_tol": self.flow_tol}


@dataclass(frozen=True)
class WPoint:
    x: complex
    y: complex
    u1: complex
    u2: complex

    @classmethod
    def from_polar(cls, X, alpha, Y, beta, R1, theta1, R2, theta2) -> "WPoint":
        return cls(cmath.rect(X, alpha), cmath.rect(Y, beta),
                   cmath.exp(complex(R1, theta1)), cmath.exp(complex(R2, theta2)))

    X = property(lambda self: abs(self.x))
    Y = property(lambda self: abs(self.y))
    alpha = property(lambda self: cmath.phase(self.x))
    beta = property(lambda self: cmath.phase(self.y))
    R1 = property(lambda self: math.log(abs(self.u1)))
    R2 = property(lambda self: math.log(abs(self.u2)))
    theta1 = property(lambda self: cmath.phase(self.u1))
    theta2 = property(lambda self: cmath.phase(self.u2))

    @property
    def Phi(self) -> float:
        return self.alpha + self.beta

    def constraint(self) -> complex:
        return self.x * self.y - 1 - self.u1 - self.u2

    def on_variety(self, tol: float = 1e-10) -> bool:
        return abs(self.constraint()) <= tol

    def swap(self) -> "WPoint":
        return WPoint(self.x, self.y, self.u2, self.u1)

    def psi(self, c: float) -> float:
        return 0.5 * (self.X ** 2 + self.Y ** 2 + (self.R1 - c) ** 2 + (self.R2 - c) ** 2)

    def as_real(self) -> np.ndarray:
        return np.array([self.x.real, self.x.imag, self.y.real, self.y.imag,
                         self.u1.real, self.u1.imag, self.u2.real, self.u2.imag])

    def to_dict(self) -> dict[str, Any]:
        def cx(z):
            return [z.real, z.imag]
        return {"x": cx(self.x), "y": cx(self.y), "u1": cx(self.u1), "u2": cx(self.u2),
                "X": self.X, "Y": self.Y, "R1": self.R1, "R2": self.R2,
                "theta1": self.theta1, "theta2": self.theta2}


def lambert_w(x: float) -> float:
    """Principal branch of the inverse of ``w -> w e^w`` for ``x >= 0`` (Halley iteration)."""
    x = float(x)
    if not x >= 0 or math.isinf(x):
        raise ValueError(f"lambert_w needs a finite x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < 1.0:
        w = x * (1.0 - x + 1.5 * x * x) if x < 0.1 else math.log1p(x) * 0.8
    else:
        lx = math.log(x)
        w = lx - math.log(lx) if x > 3.0 else math.log1p(x) * 0.8
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if abs(step) <= 4e-16 * max(1.0, abs(w_new)):
            return w_new
        w = w_new
    return w


def circle_R(c: float) -> float:
    """The unique R with ``(R - c) e^{-(R - c)} = -e^c``."""
    return c - lambert_w(math.exp(c))


def _g(t: float) -> float:
    return t * math.exp(-t)


def _reduced(r1: float, c: float) -> tuple[float, float]:
    """F(R1) with R2 eliminated through ``e^R2 = e^R1 + 1``, and dF/dR1."""
    r2 = math.log1p(math.exp(r1))
    dr2 = 1.0 / (1.0 + math.exp(-r1))
    t1, t2 = r1 - c, r2 - c
    f = _g(t1) + _g(t2)
    df = (1 - t1) * math.exp(-t1) + (1 - t2) * math.exp(-t2) * dr2
    return f, df


def reduced_bracket(c: float) -> tuple[float, float]:
    hi = c
    lo = c - 1.0
    while _reduced(lo, c)[0] >= 0:
        lo -= 1.0
        if lo < c - 60:
            raise ConvergenceError("no sign change for the reduced equation")
    return lo, hi


def _safeguarded_newton(c: float, lo: float, hi: float, tol: float, max_iter: int) -> float:
    flo = _reduced(lo, c)[0]
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f, df = _reduced(x, c)
        if f == 0:
            return x
        if (f < 0) == (flo < 0):
            lo, flo = x, f
        else:
            hi = x
        nx = x - f / df if df != 0 else None
        if nx is None or not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= tol * max(1.0, abs(x)) or hi - lo <= tol:
            return nx
        x = nx
    raise ConvergenceError("reduced Newton iteration did not converge")


def _newton_2d(a: float, b: float, c: float, tol: float, max_iter: int) -> tuple[float, float]:
    v = np.array([a, b])
    for _ in range(max_iter):
        r1, r2 = v
        t1, t2 = r1 - c, r2 - c
        F = np.array([math.exp(r1) + 1 - math.exp(r2), _g(t1) + _g(t2)])
        J = np.array([[math.exp(r1), -math.exp(r2)],
                      [(1 - t1) * math.exp(-t1), (1 - t2) * math.exp(-t2)]])
        step = np.linalg.solve(J, F)
        v = v - step
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(v))):
            return float(v[0]), float(v[1])
    raise ConvergenceError("2D Newton polish did not converge")


def solve_ab(cfg: NegVertexConfig) -> tuple[float, float]:
    lo, hi = reduced_bracket(cfg.c)
    a = _safeguarded_newton(cfg.c, lo, hi, cfg.root_tol, cfg.max_iter)
    b = math.log1p(math.exp(a))
    return _newton_2d(a, b, cfg.c, cfg.root_tol, cfg.max_iter)


def reduced_is_monotone(cfg: NegVertexConfig, samples: int = 400) -> bool:
    """Local uniqueness evidence: F changes sign once and F' keeps its sign on the bracket."""
    lo, hi = reduced_bracket(cfg.c)
    grid = np.linspace(lo, hi, samples)
    derivs = np.array([_reduced(float(x), cfg.c)[1] for x in grid])
    values = np.array([_reduced(float(x), cfg.c)[0] for x in grid])
    return bool(np.all(derivs > 0) and values[0] < 0 < values[-1])


# -- critical point equations ---------------------------------------------

RESIDUAL_NAMES = ("cp1", "cp2", "cp3", "cp4_1", "cp4_2", "cp5_1", "cp5_2", "re_constraint",
                  "im_constraint")


def residuals(p: WPoint, lam: float, mu: float, cfg: NegVertexConfig | None = None) -> np.ndarray:
    """Absolute defects of the critical point equations and of the constraint.

    Entries follow ``RESIDUAL_NAMES``. Angles of vanishing x or y are taken as 0.
    """
    c = (cfg or NegVertexConfig()).c
    X, Y, Phi = p.X, p.Y, p.Phi
    k = lam * math.cos(Phi) + mu * math.sin(Phi)
    out = [X - Y * k, Y - X * k, X * Y * (lam * math.sin(Phi) - mu * math.cos(Phi))]
    for R, th in ((p.R1, p.theta1), (p.R2, p.theta2)):
        out.append(R - c + math.exp(R) * (lam * math.cos(th) + mu * math.sin(th)))
    for th in (p.theta1, p.theta2):
        out.append(lam * math.sin(th) - mu * math.cos(th))
    g = p.constraint()
    out += [g.real, g.imag]
    return np.abs(np.array(out))


def recover_multipliers(p: WPoint, cfg: NegVertexConfig | None = None) -> tuple[float, float]:
    """Least-squares (lam, mu) from the equations that are linear in them (cp1, cp2, cp4)."""
    c = (cfg or NegVertexConfig()).c
    X, Y, Phi = p.X, p.Y, p.Phi
    rows = [[Y * math.cos(Phi), Y * math.sin(Phi)], [X * math.cos(Phi), X * math.sin(Phi)]]
    rhs = [X, Y]
    for R, th in ((p.R1, p.theta1), (p.R2, p.theta2)):
        rows.append([math.exp(R) * math.cos(th), math.exp(R) * math.sin(th)])
        rhs.append(-(R - c))
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return float(sol[0]), float(sol[1])


def circle_point(cfg: NegVertexConfig, alpha: float = 0.0) -> WPoint:
    R = circle_R(cfg.c)
    X = math.sqrt(2 * math.exp(R) + 1)
    return WPoint.from_polar(X, alpha, X, -alpha, R, 0.0, R, 0.0)


@dataclass(frozen=True)
class CriticalPointReport:
    config: NegVertexConfig
    P1: WPoint
    P2: WPoint
    P3: WPoint
    a: float
    b: float
    R: float
    circle_radius: float
    circle: tuple[WPoint, ...]
    multipliers: dict[str, tuple[float, float]] = field(hash=False)
    residuals: dict[str, np.ndarray] = field(hash=False)
    phi_pi_discriminant: float = 0.0
    reduced_monotone: bool = True

    @property
    def phi_pi_solutions(self) -> list[WPoint]:
        """Circle solutions with Phi = pi exist only when -1 + 2 e^R >= 0."""
        if self.phi_pi_discriminant < 0:
            return []
        X = math.sqrt(self.phi_pi_discriminant)
        return [WPoint.from_polar(X, math.pi, X, 0.0, self.R, math.pi, self.R, math.pi)]

    @property
    def max_residual(self) -> float:
        return max(float(np.max(r)) for r in self.residuals.values())

    @property
    def ok(self) -> bool:
        return self.max_residual < self.config.residual_tol

    def psi_values(self) -> dict[str, float]:
        c = self.config.c
        return {"P1": self.P1.psi(c), "P2": self.P2.psi(c), "P3": self.P3.psi(c),
                "circle": self.circle[0].psi(c)}

    def to_dict(self) -> dict[str, Any]:
        return {
            "c": self.config.c,
            "a": self.a,
            "b": self.b,
            "R": self.R,
            "circle_radius": self.circle_radius,
            "points": {name: {**getattr(self, name).to_dict(),
                              "multipliers": list(self.multipliers[name]),
                              "residuals": dict(zip(RESIDUAL_NAMES, map(float, self.residuals[name])))}
                       for name in ("P1", "P2", "P3")},
            "circle": {"samples": len(self.circle),
                       "multipliers": list(self.multipliers["circle"]),
                       "max_residual": float(max(np.max(self.residuals[f"circle{i}"])
                                                 for i in range(len(self.circle))))},
            "phi_pi_discriminant": self.phi_pi_discriminant,
            "phi_pi_solutions": len(self.phi_pi_solutions),
            "psi": self.psi_values(),
            "max_residual": self.max_residual,
            "reduced_monotone": self.reduced_monotone,
            "ok": self.ok,
        }


def critical_points(cfg: NegVertexConfig | None = None, circle_samples: int = 16) -> CriticalPointReport:
    cfg = cfg or NegVertexConfig()
    a, b = solve_ab(cfg)
    P1 = WPoint(0j, 0j, complex(-0.5), complex(-0.5))
    P2 = WPoint(0j, 0j, complex(math.exp(a)), complex(-math.exp(b)))
    P3 = P2.swap()
    R = circle_R(cfg.c)
    circle = tuple(circle_point(cfg, 2 * math.pi * k / circle_samples) for k in range(circle_samples))
    mult = {name: recover_multipliers(p, cfg) for name, p in (("P1", P1), ("P2", P2), ("P3", P3))}
    mult["circle"] = (1.0, 0.0)
    res = {name: residuals(p, *mult[name], cfg) for name, p in (("P1", P1), ("P2", P2), ("P3", P3))}
    for i, p in enumerate(circle):
        res[f"circle{i}"] = residuals(p, 1.0, 0.0, cfg)
    return CriticalPointReport(cfg, P1, P2, P3, a, b, R, math.sqrt(2 * math.exp(R) + 1), circle,
                               mult, res, -1 + 2 * math.exp(R), reduced_is_monotone(cfg))


# -- Hessian ---------------------------------------------------------------

def _lagrangian(v: np.ndarray, lam: float, mu: float, c: float) -> float:
    x, y = complex(v[0], v[1]), complex(v[2], v[3])
    u1, u2 = complex(v[4], v[5]), complex(v[6], v[7])
    psi = 0.5 * (abs(x) ** 2 + abs(y) ** 2 + (math.log(abs(u1)) - c) ** 2 + (math.log(abs(u2)) - c) ** 2)
    g = x * y - 1 - u1 - u2
    return psi - lam * g.real - mu * g.imag


def _constraint_jacobian(v: np.ndarray) -> np.ndarray:
    x, y = complex(v[0], v[1]), complex(v[2], v[3])
    # dG = y dx + x dy - du1 - du2, as a real 2x8 matrix
    J = np.zeros((2, 8))
    for col, coef in ((0, y), (2, x), (4, -1), (6, -1)):
        J[:, col] = [coef.real, coef.imag]
        J[:, col + 1] = [-coef.imag, coef.real]
    return J


def fd_gradient(f, v: np.ndarray, h: float = 1e-6) -> np.ndarray:
    out = np.zeros_like(v)
    for i in range(len(v)):
        e = np.zeros_like(v)
        e[i] = h
        out[i] = (f(v + e) - f(v - e)) / (2 * h)
    return out


def fd_hessian(f, v: np.ndarray, h: float = 1e-4) -> np.ndarray:
    n = len(v)
    H = np.zeros((n, n))
    f0 = f(v)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (f(v + ei) - 2 * f0 + f(v - ei)) / h ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (f(v + ei + ej) - f(v + ei - ej) - f(v - ei + ej) + f(v - ei - ej)) / (4 * h * h)
    return H


@dataclass(frozen=True)
class HessianReport:
    normal_eigenvalues: dict[str, np.ndarray] = field(hash=False)
    curve_eigenvalues: dict[str, np.ndarray] = field(hash=False)

    @property
    def ok(self) -> bool:
        return all(np.all(ev > 0) for ev in self.normal_eigenvalues.values())

    def to_dict(self) -> dict[str, Any]:
        return {"normal": {k: v.tolist() for k, v in self.normal_eigenvalues.items()},
                "along_curve": {k: v.tolist() for k, v in self.curve_eigenvalues.items()},
                "ok": self.ok}


def hessian_eigenvalues(cfg: NegVertexConfig | None = None,
                        report: CriticalPointReport | None = None) -> HessianReport:
    """Eigenvalues of the Lagrangian's Hessian on the normal complement of TC in TW, and along C."""
    cfg = cfg or NegVertexConfig()
    report = report or critical_points(cfg)
    normal, along = {}, {}
    for name in ("P1", "P2", "P3"):
        p = getattr(report, name)
        lam, mu = report.multipliers[name]
        v = p.as_real()
        H = fd_hessian(lambda w: _lagrangian(w, lam, mu, cfg.c), v)
        J = _constraint_jacobian(v)
        TW = null_space(J)
        select_xy = np.eye(8)[:4]
        TC = null_space(np.vstack([J, select_xy]))
        N = TW @ null_space(TC.T @ TW)
        normal[name] = np.linalg.eigvalsh(N.T @ H @ N)
        along[name] = np.linalg.eigvalsh(TC.T @ H @ TC)
    return HessianReport(normal, along)


def hessian_check(cfg: NegVertexConfig | None = None) -> bool:
    return hessian_eigenvalues(cfg).ok


# -- the curve C = {x = y = 0} and its amoeba ------------------------------

def amoeba_point(u1: complex) -> tuple[float, float]:
    u2 = -1 - u1
    return math.log(abs(u1)), math.log(abs(u2))


def amoeba_sample(resolution: int, log_radius: float = 6.0) -> np.ndarray:
    """(R1, R2) images of ``u1`` on a log-polar grid, as an ``(N, 2)`` array.

    Angles sit at half-steps so the grid never lands on ``u1 = -1``.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    radii = np.exp(np.linspace(-log_radius, log_radius, resolution))
    m = 2 * resolution
    angles = 2 * np.pi * (np.arange(m) + 0.5) / m
    u1 = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    u2 = -1 - u1
    keep = np.abs(u2) > 0
    return np.column_stack([np.log(np.abs(u1[keep])), np.log(np.abs(u2[keep]))])


def in_amoeba(R1, R2, tol: float = 1e-12):
    """Triangle inequalities characterising the amoeba of ``u1 + u2 + 1 = 0``."""
    A, B = np.exp(R1), np.exp(R2)
    return (A <= B + 1 + tol) & (B <= A + 1 + tol) & (1 <= A + B + tol)


def amoeba_boundary(resolution: int, log_radius: float = 6.0) -> list[np.ndarray]:
    """Images of the three real arcs of C, which bound the amoeba."""
    t = np.linspace(-log_radius, log_radius, resolution)
    s = np.exp(t)
    arcs = [s, -s[t < 0], -s[t > 0]]  # u1 in (0, inf), (-1, 0), (-inf, -1)
    return [np.column_stack([np.log(np.abs(u)), np.log(np.abs(1 + u))]) for u in arcs]


def psi_curve(w: complex, c: float) -> float:
    return 0.5 * ((math.log(abs(w)) - c) ** 2 + (math.log(abs(1 + w)) - c) ** 2)


def _curve_velocity(w: complex, c: float) -> complex:
    """Negative gradient of psi on C in the conformal metric (1/|w|^2 + 1/|1+w|^2)|dw|^2."""
    v = 1 + w
    grad = (math.log(abs(w)) - c) * w / abs(w) ** 2 + (math.log(abs(v)) - c) * v / abs(v) ** 2
    rho = 1 / abs(w) ** 2 + 1 / abs(v) ** 2
    return -grad / rho


def lift_to_curve(start: Sequence[float], upper: bool = True) -> complex:
    """A point ``w = u1`` on C with ``(log|w|, log|1+w|) = start``."""
    r = math.exp(start[0])
    cos_t = (math.exp(2 * start[1]) - 1 - r * r) / (2 * r)
    if cos_t < -1 - 1e-12 or cos_t > 1 + 1e-12:
        raise FlowError(f"start {tuple(start)} is not in the amoeba")
    cos_t = min(1.0, max(-1.0, cos_t))
    theta = math.acos(cos_t)
    return cmath.rect(r, theta if upper else -theta)


@dataclass(frozen=True)
class FlowTrace:
    points: np.ndarray  # (N, 2) amoeba coordinates
    psi: np.ndarray
    w: np.ndarray  # complex u1 along the trace
    converged: bool
    nearest: str
    distance: float

    def to_dict(self) -> dict[str, Any]:
        return {"points": self.points.tolist(), "psi": self.psi.tolist(),
                "endpoint": self.points[-1].tolist(), "converged": self.converged,
                "nearest_critical_point": self.nearest, "distance": self.distance}


def flow_trace(start: Sequence[float], cfg: NegVertexConfig | None = None, upper: bool = True,
               grad_tol: float = 1e-11, chunk: float = 5.0, max_chunks: int = 200) -> FlowTrace:
    """Downward gradient line of psi restricted to C, from an amoeba point."""
    cfg = cfg or NegVertexConfig()
    c = cfg.c
    w = lift_to_curve(start, upper) if not isinstance(start, complex) else start

    def rhs(_t, y):
        v = _curve_velocity(complex(y[0], y[1]), c)
        return [v.real, v.imag]

    ws = [w]
    converged = abs(_curve_velocity(w, c)) < grad_tol
    for _ in range(max_chunks):
        if converged:
            break
        sol = solve_ivp(rhs, (0.0, chunk), [w.real, w.imag], method="DOP853",
                        rtol=1e-12, atol=1e-14, dense_output=False)
        if not sol.success:
            raise FlowError(f"integrator failed: {sol.message}")
        ws.extend(complex(a, b) for a, b in zip(sol.y[0][1:], sol.y[1][1:]))
        w = ws[-1]
        converged = abs(_curve_velocity(w, c)) < grad_tol
    warr = np.array(ws)
    pts = np.column_stack([np.log(np.abs(warr)), np.log(np.abs(1 + warr))])
    psi = np.array([psi_curve(z, c) for z in warr])
    crit = _curve_critical_points(cfg)
    nearest, dist = min(((k, float(np.hypot(*(pts[-1] - v)))) for k, v in crit.items()), key=lambda kv: kv[1])
    return FlowTrace(pts, psi, warr, bool(converged), nearest, dist)


def _curve_critical_points(cfg: NegVertexConfig) -> dict[str, np.ndarray]:
    a, b = solve_ab(cfg)
    return {"P1": np.array([-LN2, -LN2]), "P2": np.array([a, b]), "P3": np.array([b, a])}


def downward_flowlines(cfg: NegVertexConfig | None = None, offset: float = 1e-4) -> dict[str, FlowTrace]:
    """Flowlines leaving P2 and P3 into the interior of the amoeba (both half-planes)."""
    cfg = cfg or NegVertexConfig()
    a, b = solve_ab(cfg)
    out = {}
    for name, w0 in (("P2", math.exp(a)), ("P3", -math.exp(b))):
        for side, sign in (("upper", 1), ("lower", -1)):
            out[f"{name}-{side}"] = flow_trace(complex(w0, sign * offset * abs(w0)), cfg)
    return out
