import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.special import lambertw as scipy_lambertw

from fibrations.negvertex import (LN2, FlowError, NegVertexConfig, WPoint, amoeba_boundary, amoeba_sample,
                                  circle_R, critical_points, downward_flowlines, flow_trace, hessian_check,
                                  hessian_eigenvalues, in_amoeba, lambert_w, lift_to_curve, psi_curve,
                                  reduced_is_monotone, residuals, solve_ab)

# computed with mpmath.findroot at 40 digits, c = -0.8
A_REF = -1.0775786596783316079
B_REF = 0.29298210117363669192
R_REF = -1.1247376508353735498
RADIUS_REF = 1.2843190030793545412
LAMBDA_P1_REF = 0.21370563888010938117


@pytest.fixture(scope="module")
def report():
    return critical_points(NegVertexConfig(c=-0.8))


# -- Lambert W -------------------------------------------------------------

@pytest.mark.parametrize("x", [0.0, 1e-300, 1e-12, 0.3, 1.0, math.e, 10.0, 1e5, 1e300])
def test_lambert_w_against_scipy(x):
    assert lambert_w(x) == pytest.approx(scipy_lambertw(x).real, rel=1e-14, abs=1e-300)


@given(st.floats(0, 1e8))
@settings(max_examples=200)
def test_lambert_w_identity(x):
    w = lambert_w(x)
    assert abs(w * math.exp(w) - x) <= 1e-12 * max(1.0, x)


def test_lambert_w_against_mpmath_grid():
    for x in np.linspace(0, 20, 100):
        assert lambert_w(x) == pytest.approx(float(mpmath.lambertw(x).real), rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("x", [-0.1, float("inf"), float("nan")])
def test_lambert_w_domain(x):
    with pytest.raises(ValueError):
        lambert_w(x)


# -- critical points -------------------------------------------------------

def test_defining_values(report):
    assert report.a == pytest.approx(A_REF, abs=1e-13)
    assert report.b == pytest.approx(B_REF, abs=1e-13)
    assert report.R == pytest.approx(R_REF, abs=1e-13)
    assert report.circle_radius == pytest.approx(RADIUS_REF, abs=1e-13)
    assert report.multipliers["P1"][0] == pytest.approx(LAMBDA_P1_REF, abs=1e-12)


def test_p1_exact(report):
    assert (report.P1.x, report.P1.y, report.P1.u1, report.P1.u2) == (0, 0, -0.5, -0.5)


def test_p3_is_swap_of_p2(report):
    assert report.P3 == report.P2.swap()
    assert report.P2.on_variety(1e-12)


def test_all_residuals_small(report):
    assert report.ok and report.max_residual < 1e-12
    assert len(report.circle) == 16


def test_no_phi_pi_solution(report):
    assert report.phi_pi_discriminant < 0
    assert report.phi_pi_solutions == []


def test_p2_is_critical_on_real_arc():
    """Oracle: zero of d/dw psi on C along the real ray w > 0."""
    c = -0.8

    def dpsi(w):
        return (math.log(w) - c) / w + (math.log(1 + w) - c) / (1 + w)
    w = brentq(dpsi, 0.05, 1.0, xtol=1e-15)
    assert math.log(w) == pytest.approx(A_REF, abs=1e-9)
    assert math.log(1 + w) == pytest.approx(B_REF, abs=1e-9)


def test_p1_is_minimum_on_curve(report):
    c = -0.8
    rng = np.random.default_rng(0)
    w = rng.normal(size=2000) + 1j * rng.normal(size=2000)
    w = w[(np.abs(w) > 1e-6) & (np.abs(1 + w) > 1e-6)]
    p1 = psi_curve(-0.5, c)
    assert all(psi_curve(z, c) >= p1 - 1e-12 for z in w)


def test_circle_points_satisfy_all_equations(report):
    for p in report.circle:
        assert np.max(residuals(p, 1.0, 0.0)) < 1e-12
        assert p.R1 == pytest.approx(circle_R(-0.8))


def test_circle_constraint_from_polar():
    R = circle_R(-0.8)
    X = math.sqrt(2 * math.exp(R) + 1)
    for alpha in np.linspace(0, 2 * math.pi, 7):
        p = WPoint.from_polar(X, alpha, X, -alpha, R, 0.0, R, 0.0)
        assert abs(p.constraint()) < 1e-12


def test_wrong_multipliers_give_large_residual(report):
    assert np.max(residuals(report.P2, 0.0, 0.0)) > 1e-3


@pytest.mark.parametrize("c", np.linspace(-0.99, -0.70, 30))
def test_sweep_converges(c):
    cfg = NegVertexConfig(c=float(c))
    rep = critical_points(cfg)
    assert rep.ok and reduced_is_monotone(cfg)
    a, b = solve_ab(cfg)
    assert abs(math.exp(a) + 1 - math.exp(b)) < 1e-12


def test_config_round_trip():
    cfg = NegVertexConfig(c=-0.75, residual_tol=1e-8)
    assert NegVertexConfig.from_dict(cfg.to_dict()) == cfg


def test_report_serialises(report):
    data = report.to_dict()
    assert data["ok"] and data["phi_pi_solutions"] == 0
    assert set(data["points"]) == {"P1", "P2", "P3"}


# -- Hessian ---------------------------------------------------------------

def test_hessian_normal_directions_positive():
    h = hessian_eigenvalues(NegVertexConfig())
    assert h.ok
    assert hessian_check()


# -- amoeba and flow -------------------------------------------------------

def test_amoeba_sample_in_amoeba():
    pts = amoeba_sample(120)
    assert pts.shape[1] == 2 and len(pts) > 0
    assert in_amoeba(pts[:, 0], pts[:, 1], 1e-9).all()


def test_amoeba_triangle_inequality_oracle():
    rng = np.random.default_rng(3)
    R = rng.uniform(-3, 3, size=(4000, 2))
    A, B = np.exp(R[:, 0]), np.exp(R[:, 1])
    # a triangle with sides A, B, 1 exists exactly when u1 + u2 + 1 = 0 has a solution
    oracle = (A + B >= 1) & (A + 1 >= B) & (B + 1 >= A)
    assert np.array_equal(in_amoeba(R[:, 0], R[:, 1], 0.0), oracle)


def test_amoeba_boundary_on_real_arcs():
    for arc in amoeba_boundary(200):
        A, B = np.exp(arc[:, 0]), np.exp(arc[:, 1])
        slack = np.minimum.reduce([A + B - 1, A + 1 - B, B + 1 - A])
        assert np.max(np.abs(slack)) < 1e-9


def test_lift_to_curve():
    w = lift_to_curve((0.0, -0.5))
    assert math.log(abs(w)) == pytest.approx(0.0, abs=1e-12)
    assert math.log(abs(1 + w)) == pytest.approx(-0.5, abs=1e-12)
    assert w.imag > 0 and lift_to_curve((0.0, -0.5), upper=False) == w.conjugate()


def test_lift_outside_amoeba():
    with pytest.raises(FlowError):
        lift_to_curve((-0.5, -1.5))


@pytest.mark.parametrize("start", [(0.0, -0.5), (1.0, 1.2), (-2.0, -0.05)])
def test_flow_descends_to_p1(start):
    tr = flow_trace(start)
    assert tr.converged and tr.nearest == "P1" and tr.distance < 1e-6
    assert np.all(np.diff(tr.psi) <= 1e-12)
    assert tr.points[-1] == pytest.approx([-LN2, -LN2], abs=1e-6)


def test_downward_flowlines_from_saddles():
    lines = downward_flowlines()
    assert set(lines) == {"P2-upper", "P2-lower", "P3-upper", "P3-lower"}
    for tr in lines.values():
        assert tr.nearest == "P1" and tr.distance < 1e-6
        assert np.all(np.diff(tr.psi) <= 1e-12)


def test_flow_from_complex_start():
    tr = flow_trace(cmath.rect(0.7, 2.0))
    assert tr.nearest == "P1"
