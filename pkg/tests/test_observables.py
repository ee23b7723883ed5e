import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clpositivity import (DomainError, EvolvedDensity, HermiteGaussState, ModelParams, QuadratureError,
                          QuadratureSpec, default_time_grid, moments, purity, rho_position, scan, sigma_rs, t_min)
from clpositivity.observables import MomentSet, purity_temperature_derivative
from clpositivity.oracle import min_kernel_eigenvalue
from clpositivity.evolution import rho_position_grid

from conftest import CASE_II, FIG1


def ev_of(n=0, beta=0.6, **kw):
    return EvolvedDensity(HermiteGaussState(n, beta), ModelParams(**(kw or FIG1)))


# ---- quadrature settings------------------------------------------------------

@pytest.mark.parametrize("kwargs", [dict(nodes_K=8), dict(nodes_r=15), dict(half_width_K=-1.0, half_width_r=1.0),
                                    dict(half_width_K=1.0), dict(refine_tol=0.0), dict(max_nodes=32)])
def test_quadrature_spec_rejects(kwargs):
    with pytest.raises(DomainError):
        QuadratureSpec(**kwargs)


# ---- purity ----------------------------------------------------------------

@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("beta", [0.6, 1.0, 2.0])
def test_initial_purity(n, beta):
    est = purity(ev_of(n, beta), 0.0)
    assert est.value == pytest.approx(1.0, abs=1e-6)
    assert est.error < 1e-8


@pytest.mark.parametrize("T,expected", [(0.5, 1.0), (5.0, 0.1)])
def test_late_purity_case_one(T, expected):
    ev = ev_of(1, gamma=0.35, temperature=T)
    assert purity(ev, 50 / 0.35).value == pytest.approx(expected, abs=1e-4)


def test_explicit_rectangle_matches_auto():
    ev = ev_of(2, **CASE_II)
    auto = purity(ev, 1.3).value
    rect = purity(ev, 1.3, QuadratureSpec(half_width_K=12.0, half_width_r=12.0, nodes_K=128, nodes_r=128)).value
    assert rect == pytest.approx(auto, abs=1e-9)


def test_quadrature_consistency_under_doubling():
    ev = ev_of(2, **CASE_II)
    a = purity(ev, 2.0, QuadratureSpec(nodes_K=64, nodes_r=64)).value
    b = purity(ev, 2.0, QuadratureSpec(nodes_K=128, nodes_r=128)).value
    assert abs(a - b) < 1e-10


def test_quadrature_failure_carries_estimates():
    spec = QuadratureSpec(half_width_K=400.0, half_width_r=400.0, nodes_K=16, nodes_r=16, max_nodes=32)
    with pytest.raises(QuadratureError) as info:
        purity(ev_of(0), 1.0, spec)
    assert len(info.value.estimates) == 2


# ---- moments ---------------------------------------------------------------

@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("beta", [0.6, 1.0])
def test_initial_moments(n, beta):
    m = moments(ev_of(n, beta), 0.0)
    assert m.mean_x == 0 and m.mean_p == 0
    assert m.var_x == pytest.approx((n + 0.5) / beta**2, rel=1e-13)
    assert m.var_p == pytest.approx((n + 0.5) * beta**2, rel=1e-13)
    assert abs(m.cov_xp) < 1e-15


def test_ground_state_moments():
    m = moments(ev_of(0, 1.0), 0.0)
    assert (m.mean_x2, m.mean_p2) == pytest.approx((0.5, 0.5), abs=1e-15)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_initial_moments_by_position_quadrature(n):
    from scipy import integrate
    state = HermiteGaussState(n, 0.6)
    x2, _ = integrate.quad(lambda R: R * R * rho_position(state, R, 0.0), -40, 40, limit=200)
    h = 1e-3

    def d2r(R):
        return (rho_position(state, R, h) - 2 * rho_position(state, R, 0.0) + rho_position(state, R, -h)) / h**2

    p2, _ = integrate.quad(lambda R: -d2r(R), -40, 40, limit=200)
    m = moments(ev_of(n, 0.6), 0.0)
    assert m.mean_x2 == pytest.approx(x2, rel=1e-9)
    assert m.mean_p2 == pytest.approx(p2, rel=1e-6)


@pytest.mark.parametrize("t", [0.3, 1.0, 4.0])
def test_moments_against_grid_kernel(t):
    ev = ev_of(2, **CASE_II)
    x = np.linspace(-30, 30, 301)
    ker = rho_position_grid(ev, t, x)
    diag = np.real(np.diag(ker.matrix)) * ker.dx
    assert moments(ev, t).mean_x2 == pytest.approx(float(np.sum(x * x * diag)), rel=1e-7)


@pytest.mark.parametrize("t", [0.2, 1.0, 7.0])
@pytest.mark.parametrize("n", [0, 2])
def test_analytic_vs_finite_difference(t, n):
    ev = ev_of(n, **CASE_II)
    a, b = moments(ev, t), moments(ev, t, method="fd")
    for name in ("mean_x2", "mean_p2", "sym_xp"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-6, abs=1e-8)


def test_unknown_method():
    with pytest.raises(ValueError):
        moments(ev_of(), 1.0, method="spline")


@pytest.mark.parametrize("t", [0.3, 2.0])
def test_ehrenfest_orientation(t):
    # d<x^2>/dt = <xp + px>, d<p^2>/dt = -2 w^2 sym - 4 gamma <p^2> + 2 D_pp  (case I)
    ev = ev_of(1)
    h = 1e-5
    m = moments(ev, t)
    dx2 = (moments(ev, t + h).mean_x2 - moments(ev, t - h).mean_x2) / (2 * h)
    dp2 = (moments(ev, t + h).mean_p2 - moments(ev, t - h).mean_p2) / (2 * h)
    assert dx2 == pytest.approx(2 * m.sym_xp, rel=1e-7)
    assert dp2 == pytest.approx(-2 * m.sym_xp - 4 * 0.35 * m.mean_p2 + 2 * 0.35, rel=1e-6)


@pytest.mark.parametrize("T", [0.5, 5.0])
def test_equipartition(T):
    m = moments(ev_of(2, gamma=0.35, temperature=T), 50 / 0.35)
    assert m.var_x == pytest.approx(T, abs=1e-4)
    assert m.var_p == pytest.approx(T, abs=1e-4)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_initial_sigma_rs(n):
    assert 4 * sigma_rs(moments(ev_of(n, 0.83), 0.0)) == pytest.approx((2 * n + 1) ** 2, rel=1e-12)


def test_sigma_rs_formula():
    m = MomentSet(0.5, 1.0, -0.25, 2.0, 0.1)
    assert sigma_rs(m) == pytest.approx(0.75 * (2.0 - 0.0625) - (0.1 + 0.125) ** 2)
    assert not m.negative_variance


# ---- scans -----------------------------------------------------------------

def test_default_time_grid():
    grid = default_time_grid(0.35)
    assert grid.size == 400 and grid[0] == pytest.approx(1e-3) and grid[-1] == pytest.approx(50 / 0.35)
    assert np.allclose(np.diff(np.log(grid)), np.log(grid[1] / grid[0]))
    assert default_time_grid(1.0, 5, log_spacing=False)[1] == pytest.approx(1e-3 + (50 - 1e-3) / 4)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_scan_single_zero(n):
    s = scan(ev_of(n), [0.0])
    assert s.purity[0] == pytest.approx(1.0, abs=1e-6)
    assert s.sigma_rs_4[0] == pytest.approx((2 * n + 1) ** 2, abs=1e-6)
    assert not s.purity_violation[0] and not s.uncertainty_violation[0]


def test_scan_parallel_preserves_order():
    grid = np.geomspace(0.01, 30, 12)
    a = scan(ev_of(1), grid)
    b = scan(ev_of(1), grid, workers=4)
    assert np.array_equal(a.purity, b.purity) and np.array_equal(a.sigma_rs_4, b.sigma_rs_4)


@pytest.mark.parametrize("grid", [[], [1.0, 0.5], [-1.0, 1.0], [0.0, 0.0]])
def test_scan_rejects_grids(grid):
    with pytest.raises(DomainError):
        scan(ev_of(), grid)


def test_scan_marks_failed_samples():
    spec = QuadratureSpec(half_width_K=400.0, half_width_r=400.0, nodes_K=16, nodes_r=16, max_nodes=32)
    s = scan(ev_of(), [0.5, 1.0], spec)
    assert s.failed.all() and s.any_failed and not s.purity_violation.any()


def test_violating_state_flags():
    # narrow state that fails the pure-state width condition: purity rises above one at once
    ev = ev_of(0, 2.0, gamma=0.35, temperature=0.5)
    s = scan(ev, [0.05, 0.2, 0.5])
    assert s.purity_violation.all()


# ---- temperature monotonicity ----------------------------------------------

@pytest.mark.parametrize("case,cutoff", [("I", None), ("II", 2.0)])
@pytest.mark.parametrize("factor", [1.0, 3.0])
def test_purity_decreases_with_temperature(case, cutoff, factor):
    floor = t_min(case, 0.01, 1.0, cutoff)
    T1, T2 = factor * floor, 1.7 * factor * floor
    for tau in (0.5, 1, 2, 5, 20):
        p1 = purity(ev_of(1, gamma=0.01, temperature=T1, cutoff=cutoff, case=case), tau).value
        p2 = purity(ev_of(1, gamma=0.01, temperature=T2, cutoff=cutoff, case=case), tau).value
        assert p2 <= p1 + 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.5, 5.0), st.floats(0.1, 10.0), st.integers(0, 2))
def test_purity_temperature_derivative_matches_fd(gamma, T, tau, n):
    ev = ev_of(n, gamma=gamma, temperature=T, cutoff=1.5, case="II")
    dT = 1e-4 * T
    hi = purity(ev_of(n, gamma=gamma, temperature=T + dT, cutoff=1.5, case="II"), tau).value
    lo = purity(ev_of(n, gamma=gamma, temperature=T - dT, cutoff=1.5, case="II"), tau).value
    assert purity_temperature_derivative(ev, tau).value == pytest.approx((hi - lo) / (2 * dT), rel=1e-5, abs=1e-8)


# ---- purity versus kernel spectrum -----------------------------------------

@pytest.mark.parametrize("tau", [0.05, 0.3, 0.7])
def test_purity_above_one_implies_negative_eigenvalue(tau):
    ev = ev_of(0, 2.0, gamma=0.35, temperature=0.5)
    p = purity(ev, tau).value
    assert p > 1 + 1e-4
    rep = min_kernel_eigenvalue(ev, tau)
    assert rep.min_eigenvalue < 0
    assert rep.purity == pytest.approx(p, rel=1e-6)


def test_steady_flatness():
    ev = ev_of(1)
    t, h = 50 / 0.35, 1e-2
    dp = (purity(ev, t + h).value - purity(ev, t - h).value) / (2 * h)
    ds = (4 * sigma_rs(moments(ev, t + h)) - 4 * sigma_rs(moments(ev, t - h))) / (2 * h)
    assert abs(dp) < 1e-5 and abs(ds) < 1e-5
