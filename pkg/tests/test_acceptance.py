"""Acceptance criteria 1-12. Each test prints one ``CRITERION n PASS/FAIL`` line."""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from clpositivity import (EvolvedDensity, HermiteGaussState, Infeasible, ModelParams, default_time_grid,
                          equivalence_lattice, min_kernel_eigenvalue, moments, pure_state_condition, purity,
                          rho_fourier, scan, sigma_rs, steady_spectrum, t_min, temperature_derivative_integrand,
                          temperature_monotonicity_check)
from clpositivity.steady import case_threshold

BETA = 0.6
NS = (0, 1, 2)
INV_SQRT_2PI = 1 / math.sqrt(2 * math.pi)

# tolerances
EQUIV_RTOL = 1e-8
EQUIV_SECONDS = 10.0
CONSERVATION_TOL = 1e-10
INITIAL_TOL = 1e-6
FLAG_TOL = 1e-6
FIG1_SECONDS = 120.0
SPECTRUM_TOL = 1e-5
SUM_TOL = 1e-12
STEADY_PURITY_TOL = 1e-5
TMIN_II_TOL = 1e-4
MONOTONE_TOL = 1e-6
EIGEN_NEG_TOL = -1e-8
H_TOL = 1e-9


def report(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {title} | {detail}", flush=True)
    assert ok, detail


def evolved(n, **kw):
    return EvolvedDensity(HermiteGaussState(n, BETA), ModelParams(**kw))


@lru_cache(maxsize=None)
def figure_scan(case, gamma, temperature, cutoff, n):
    ev = evolved(n, gamma=gamma, temperature=temperature, cutoff=cutoff, case=case)
    return scan(ev, default_time_grid(gamma), flag_tol=FLAG_TOL)


def violations(case, gamma, temperature, cutoff):
    out = {}
    for n in NS:
        s = figure_scan(case, gamma, temperature, cutoff, n)
        out[n] = (int(s.purity_violation.sum()), int(s.uncertainty_violation.sum()), float(np.nanmax(s.purity)),
                  float(np.min(s.sigma_rs_4)), int(s.failed.sum()))
    return out


FIG3_T_LOW = 10 * t_min("I", 0.01)
FIG3_T_HIGH = 1e3 * t_min("I", 0.01)


def test_criterion_01_oracle_equivalence(capsys):
    start = time.perf_counter()
    devs = {g: equivalence_lattice(evolved(0, gamma=g, temperature=0.5), tol=EQUIV_RTOL).max_rel_dev
            for g in (0.35, 2.0)}
    elapsed = time.perf_counter() - start
    ok = max(devs.values()) < EQUIV_RTOL and elapsed < EQUIV_SECONDS
    report(capsys, 1, "closed form vs RK4 on 9x9x5 lattice", ok,
           f"max rel dev {max(devs.values()):.2e} (tol {EQUIV_RTOL:g}), {elapsed:.1f}s (limit {EQUIV_SECONDS:g}s)")


def test_criterion_02_conservation(capsys):
    cases = [dict(gamma=0.35, temperature=0.5), dict(gamma=0.15, temperature=4.49, cutoff=1.25, case="II"),
             dict(gamma=0.15, temperature=4.49, cutoff=1.25, case="III"), dict(gamma=0.35, case="IV")]
    K, r = np.meshgrid(np.linspace(-3, 3, 15), np.linspace(-3, 3, 15))
    trace_res = herm_res = 0.0
    for kw in cases:
        for n in NS:
            ev = evolved(n, **kw)
            for tau in (0, 0.1, 1, 10, 50):
                trace_res = max(trace_res, abs(complex(rho_fourier(ev, 0.0, 0.0, tau)) - INV_SQRT_2PI))
                diff = rho_fourier(ev, K, r, tau) - np.conj(rho_fourier(ev, -K, -r, tau))
                herm_res = max(herm_res, float(np.max(np.abs(diff))))
    ok = trace_res < CONSERVATION_TOL and herm_res < CONSERVATION_TOL
    report(capsys, 2, "trace and Hermiticity, cases I-IV", ok,
           f"trace residue {trace_res:.1e}, Hermiticity residue {herm_res:.1e} (tol {CONSERVATION_TOL:g})")


def test_criterion_03_initial_purity_and_uncertainty(capsys):
    worst_p = worst_s = 0.0
    for n in NS:
        ev = evolved(n, gamma=0.35, temperature=0.5)
        worst_p = max(worst_p, abs(purity(ev, 0.0).value - 1))
        worst_s = max(worst_s, abs(4 * sigma_rs(moments(ev, 0.0)) - (2 * n + 1) ** 2))
    ok = worst_p < INITIAL_TOL and worst_s < INITIAL_TOL
    report(capsys, 3, "P(0) = 1 and 4 sigma_RS(0) = (2n+1)^2", ok,
           f"max |P-1| {worst_p:.1e}, max |4sRS-(2n+1)^2| {worst_s:.1e} (tol {INITIAL_TOL:g})")


def test_criterion_04_fig1(capsys):
    start = time.perf_counter()
    stats = violations("I", 0.35, t_min("I", 0.35), None)
    elapsed = time.perf_counter() - start
    flagged = sum(v[0] + v[1] for v in stats.values())
    failed = sum(v[4] for v in stats.values())
    ok = flagged == 0 and failed == 0 and elapsed < FIG1_SECONDS
    detail = ", ".join(f"n={n}: max P {v[2]:.6f}, min 4sRS {v[3]:.6f}" for n, v in stats.items())
    report(capsys, 4, "Fig. 1 has no violations", ok,
           f"{flagged} flagged, {failed} failed samples, {elapsed:.0f}s (limit {FIG1_SECONDS:g}s); {detail}")


def test_criterion_05_fig3(capsys):
    low = violations("I", 0.01, FIG3_T_LOW, None)
    high = violations("I", 0.01, FIG3_T_HIGH, None)
    low_p = sum(v[0] for v in low.values())
    low_s = sum(v[1] for v in low.values())
    high_flags = sum(v[0] + v[1] for v in high.values())
    ok = low_p > 0 and low_s > 0 and high_flags == 0
    detail = ", ".join(f"n={n}: max P {v[2]:.6f}, min 4sRS {v[3]:.6f}" for n, v in low.items())
    report(capsys, 5, "Fig. 3: violations at 10 T_min, none at 1e3 T_min", ok,
           f"T'={FIG3_T_LOW:g}: {low_p} purity and {low_s} uncertainty violations ({detail}); "
           f"T'={FIG3_T_HIGH:g}: {high_flags} violations")


def test_criterion_06_fig4(capsys):
    low = violations("II", 0.01, FIG3_T_LOW, 2.0)
    high = violations("II", 0.01, FIG3_T_HIGH, 2.0)
    low_flags = sum(v[0] + v[1] for v in low.values())
    high_flags = sum(v[0] + v[1] for v in high.values())
    ok = low_flags > 0 and high_flags == 0
    detail = ", ".join(f"n={n}: max P {v[2]:.6f}, min 4sRS {v[3]:.6f}" for n, v in low.items())
    report(capsys, 6, "Fig. 4: violations at T'=5, none at T'=500", ok,
           f"T'={FIG3_T_LOW:g}: {low_flags} violations ({detail}); T'={FIG3_T_HIGH:g}: {high_flags} violations")


def test_criterion_07_steady_spectrum(capsys):
    worst_eig = worst_purity = 0.0
    sums = []
    for T in (0.5, 5.0):
        params = ModelParams(gamma=0.35, temperature=T)
        spectrum = steady_spectrum(params)
        sums.append(abs(spectrum.total - 1))
        ev = EvolvedDensity(HermiteGaussState(1, BETA), params)
        rep = min_kernel_eigenvalue(ev, 50 / 0.35)
        worst_eig = max(worst_eig, float(np.max(np.abs(rep.eigenvalues[:6] - spectrum.eigenvalues(6)))))
        plancherel = purity(ev, 50 / 0.35).value
        worst_purity = max(worst_purity, abs(spectrum.purity - 1 / (2 * T)), abs(plancherel - 1 / (2 * T)))
    exact_point = steady_spectrum(ModelParams(gamma=0.35, temperature=0.5)).purity
    ok = worst_eig < SPECTRUM_TOL and max(sums) < SUM_TOL and worst_purity < STEADY_PURITY_TOL \
        and abs(exact_point - 1) < STEADY_PURITY_TOL
    report(capsys, 7, "steady spectrum and purity, case I", ok,
           f"top-6 eig dev {worst_eig:.1e}, |sum-1| {max(sums):.1e}, purity dev {worst_purity:.1e}, "
           f"P(inf) at T'=0.5 = {exact_point:.12g}")


def test_criterion_08_tmin_table(capsys):
    t1 = t_min("I", 0.15)
    t2 = t_min("II", 0.15, cutoff=1.25)
    t3 = t_min("III", 0.15, cutoff=1.25)
    t3_ref = 0.5 * math.sqrt(1 + 2 * 1.25 * 0.15 / (3 * math.pi))
    t4 = t_min("IV", 0.15)
    ok = t1 == 0.5 and abs(t2 - 0.4490) <= TMIN_II_TOL and abs(t3 - t3_ref) < 1e-15 and isinstance(t4, Infeasible)
    report(capsys, 8, "T_min table", ok, f"I={t1}, II={t2:.6f}, III={t3:.6f}, IV={t4}")


def test_criterion_09_temperature_monotonicity(capsys):
    setups = [
        ("Fig. 2 case I", dict(gamma=0.15, temperature=5.0)),
        ("Fig. 2 case II", dict(gamma=0.15, temperature=5.0, cutoff=1.25, case="II")),
        ("Fig. 2 case III", dict(gamma=0.15, temperature=5.0, cutoff=1.25, case="III")),
        ("Fig. 4 case II low", dict(gamma=0.01, temperature=FIG3_T_LOW, cutoff=2.0, case="II")),
        ("Fig. 4 case II high", dict(gamma=0.01, temperature=FIG3_T_HIGH, cutoff=2.0, case="II")),
        ("Fig. 4 case III low", dict(gamma=0.01, temperature=FIG3_T_LOW, cutoff=2.0, case="III")),
    ]
    taus = (0.0, 0.5, 1, 2, 5, 20, 100, 1000)
    worst, where = -math.inf, ""
    for label, kw in setups:
        for n in NS:
            rep = temperature_monotonicity_check(evolved(n, **kw), taus, 1e-3 * kw["temperature"],
                                                 tol=MONOTONE_TOL)
            m = float(np.max(rep.dpdT))
            if m > worst:
                worst, where = m, f"{label}, n={n}"
    ok = worst <= MONOTONE_TOL
    report(capsys, 9, "dP/dT <= 0 (finite difference)", ok,
           f"largest dP/dT {worst:.2e} at {where} (tol {MONOTONE_TOL:g})")


def test_criterion_10_purity_eigenvalue_coupling(capsys):
    flagged = []
    for n in NS:
        s = figure_scan("I", 0.01, FIG3_T_LOW, None, n)
        flagged += [(n, float(t)) for t in s.times[s.purity_violation]]
    mins = [min_kernel_eigenvalue(evolved(n, gamma=0.01, temperature=FIG3_T_LOW), t).min_eigenvalue
            for n, t in flagged]
    ok = bool(flagged) and all(m < EIGEN_NEG_TOL for m in mins)
    detail = (f"{len(flagged)} flagged samples, max of min eigenvalues {max(mins):.2e}" if flagged
              else "criterion 5 flagged no purity violation, so the coupling cannot be exercised")
    report(capsys, 10, "purity violation implies negative kernel eigenvalue", ok, detail)


def test_criterion_11_pure_state_condition(capsys):
    g, T, W = 0.15, 4.49, 1.25
    # published thresholds at vanishing covariance
    published = {"I": 0.5 / math.sqrt(T), "II": 0.5 * math.sqrt(1 / T), "III": math.sqrt(1 / (4 * T)),
                 "IV": math.sqrt(math.sqrt(1 - g * g))}
    ours = {c: case_threshold(c, g, T if c != "IV" else None, W if c in ("II", "III") else None) for c in published}
    thresh_dev = max(abs(ours[c] - published[c]) for c in published)
    p = ModelParams(gamma=0.35, temperature=0.5)
    sigma_xx = math.sqrt(moments(EvolvedDensity(HermiteGaussState(0, BETA), p), 0.0).var_x)
    cond = pure_state_condition(p, sigma_xx, 0.0)
    rates = []
    h = 1e-4
    for n in NS:
        ev = EvolvedDensity(HermiteGaussState(n, BETA), p)
        # central difference around tau = h
        rates.append((purity(ev, 2 * h).value - purity(ev, 0.0).value) / (2 * h))
    ok = thresh_dev < 1e-12 and cond and max(rates) <= 0
    report(capsys, 11, "pure-state width thresholds and Fig. 1 initial slope", ok,
           f"threshold dev {thresh_dev:.1e}, condition {cond} at sigma_xx={sigma_xx:.4f}, "
           f"initial dP/dtau {', '.join(f'{r:.4f}' for r in rates)}")


def test_criterion_12_h_at_zero(capsys):
    K, r = np.meshgrid(np.linspace(-5, 5, 15), np.linspace(-5, 5, 15))
    worst = 0.0
    for case in ("II", "III"):
        p = ModelParams(gamma=0.15, temperature=4.49, cutoff=1.25, case=case)
        worst = max(worst, float(np.max(np.abs(temperature_derivative_integrand(K, r, 0.0, p)))))
    report(capsys, 12, "H(K, r, 0) = 0 for cases II and III", worst < H_TOL, f"max |H| {worst:.1e} (tol {H_TOL:g})")


@pytest.mark.parametrize("tau", [0.05, 0.2, 0.5])
def test_supplementary_coupling_on_violating_state(tau):
    """Not a numbered criterion: the coupling on a state that does violate (beta'=2, T'=T_min)."""
    ev = EvolvedDensity(HermiteGaussState(0, 2.0), ModelParams(gamma=0.35, temperature=0.5))
    assert purity(ev, tau).value > 1 + FLAG_TOL
    assert min_kernel_eigenvalue(ev, tau).min_eigenvalue < EIGEN_NEG_TOL
