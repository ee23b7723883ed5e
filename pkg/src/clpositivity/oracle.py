"""Independent checks of the closed forms.

* RK4 integration of the characteristic ODEs (no use of the back-map or of
  the exponent formulas).
* Direct diagonalisation of the position kernel on a grid.
* The purity rate identity dP/dt = (2 gamma - 4 D_px) P + 8 D_px F1 + F2 with
  F1, F2 evaluated as matrix functionals of the grid kernel.
* Finite-difference temperature derivative of the purity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepSizeError
from .evolution import EvolvedDensity, KernelCoverageWarning, rho_fourier, rho_position_grid
from .observables import QuadratureSpec, moments, purity
from .states import rho_fourier_initial

EQUIVALENCE_RTOL = 1e-8


def _rk4_backward(K, r, t, gamma, omega_sq, d_pp, d_px, steps):
    """Integrate (K, r, J) from time t back to 0; returns (K0, r0, exponent)."""

    def rhs(k, rr):
        return omega_sq * rr, 2 * gamma * rr - k, 2 * d_px * rr * k - d_pp * rr * rr

    h = -t / steps
    k, rr = K.copy(), r.copy()
    j = np.zeros_like(k)
    for _ in range(steps):
        a1, b1, c1 = rhs(k, rr)
        a2, b2, c2 = rhs(k + h / 2 * a1, rr + h / 2 * b1)
        a3, b3, c3 = rhs(k + h / 2 * a2, rr + h / 2 * b2)
        a4, b4, c4 = rhs(k + h * a3, rr + h * b3)
        k = k + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        rr = rr + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        j = j + h / 6 * (c1 + 2 * c2 + 2 * c3 + c4)
    # j = int_t^0 (source) ds, the exponent is the integral from 0 to t
    return k, rr, -j


def propagate_characteristic_numeric(K, r, t, evolved: EvolvedDensity, step_count: int = 1000, rtol: float = 1e-9,
                                     max_doublings: int = 4):
    """rho(K, r, t) by classical RK4 along the characteristic through (K, r).

    Runs with n and 2n steps are compared; while their relative
    disagreement exceeds ``rtol`` the step is halved again, at most
    ``max_doublings`` times, after which :class:`StepSizeError` is raised.
    The finer result is returned (its error is about 1/15 of the last
    disagreement).
    """
    if step_count < 100:
        raise DomainError(f"step_count must be >= 100, got {step_count}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    K = np.asarray(K, dtype=complex)
    r = np.asarray(r, dtype=complex)
    K, r = np.broadcast_arrays(K, r)
    if t == 0:
        return rho_fourier_initial(evolved.state, K, r)
    p = evolved.params
    args = (t, p.gamma, p.omega**2, p.d_pp, p.d_px)

    def run(steps):
        k0, r0, expo = _rk4_backward(K, r, *args, steps)
        return rho_fourier_initial(evolved.state, k0, r0) * np.exp(expo)

    steps = step_count
    prev = run(steps)
    for _ in range(max_doublings + 1):
        steps *= 2
        cur = run(steps)
        worst = float(np.max(np.abs(prev - cur) / np.maximum(np.abs(cur), 1e-300)))
        if worst <= rtol:
            return cur
        prev = cur
    raise StepSizeError(f"RK4 with {steps // 2} and {steps} steps still differ by {worst:.3g} (rtol {rtol:g})")


@dataclass(frozen=True)
class EquivalenceReport:
    max_rel_dev: float
    points: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_dev < self.tol


def equivalence_lattice(evolved: EvolvedDensity, K_values=None, r_values=None, t_values=None, step_count=1000,
                        tol=EQUIVALENCE_RTOL) -> EquivalenceReport:
    """Max relative deviation of the closed form from RK4 over a (K, r, t) lattice (9 x 9 x 5 by default)."""
    K_values = np.linspace(-2, 2, 9) if K_values is None else np.asarray(K_values, dtype=float)
    r_values = np.linspace(-2, 2, 9) if r_values is None else np.asarray(r_values, dtype=float)
    t_values = (0.1, 0.5, 1.0, 2.0, 5.0) if t_values is None else t_values
    KK, RR = np.meshgrid(K_values, r_values, indexing="ij")
    worst = 0.0
    for t in t_values:
        exact = rho_fourier(evolved, KK, RR, t)
        numeric = propagate_characteristic_numeric(KK, RR, t, evolved, step_count)
        dev = np.abs(exact - numeric) / np.maximum(np.abs(exact), 1e-300)
        worst = max(worst, float(dev.max()))
    return EquivalenceReport(worst, KK.size * len(t_values), tol)


def suggest_grid(evolved: EvolvedDensity, t, n_sigma=8.0, max_nodes=4001) -> np.ndarray:
    """Symmetric uniform grid: half-width n_sigma*sigma_x, spacing pi/(n_sigma*sigma_p)."""
    m = moments(evolved, t)
    sx, sp = math.sqrt(abs(m.mean_x2)), math.sqrt(abs(m.mean_p2))
    half = n_sigma * sx
    dx = math.pi / (n_sigma * sp)
    half_count = int(math.ceil(half / dx))
    if 2 * half_count + 1 > max_nodes:
        raise DomainError(f"grid would need {2 * half_count + 1} nodes (> max_nodes={max_nodes})")
    return dx * np.arange(-half_count, half_count + 1)


@dataclass(frozen=True)
class GridEigenReport:
    t: float
    min_eigenvalue: float
    max_eigenvalue: float
    eigenvalues: np.ndarray
    trace_residue: float
    hermiticity_residue: float
    half_width: float
    nodes: int
    coverage_sigmas: float
    aliasing_estimate: float
    coverage_ok: bool

    @property
    def purity(self) -> float:
        return float(np.sum(self.eigenvalues**2))


def min_kernel_eigenvalue(evolved: EvolvedDensity, t, grid=None, min_coverage=6.0) -> GridEigenReport:
    """Spectrum of the Hermitian part of the dx-weighted kernel on ``grid``."""
    x = suggest_grid(evolved, t) if grid is None else np.asarray(grid, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelCoverageWarning)
        ker = rho_position_grid(evolved, t, x)
    ev = np.linalg.eigvalsh(ker.operator)
    sx = math.sqrt(abs(moments(evolved, t).var_x))
    coverage = float(x[-1] / sx) if sx > 0 else math.inf
    return GridEigenReport(
        t=float(t),
        min_eigenvalue=float(ev[0]),
        max_eigenvalue=float(ev[-1]),
        eigenvalues=ev[::-1].copy(),
        trace_residue=abs(ker.trace - 1.0),
        hermiticity_residue=ker.hermiticity_residue,
        half_width=float(x[-1]),
        nodes=int(x.size),
        coverage_sigmas=coverage,
        aliasing_estimate=ker.aliasing_estimate,
        coverage_ok=coverage >= min_coverage and not ker.truncation_warning,
    )


def refined_grid(grid) -> np.ndarray:
    """Same interval, half the spacing (2N - 1 nodes)."""
    x = np.asarray(grid, dtype=float)
    return np.linspace(x[0], x[-1], 2 * x.size - 1)


def grid_convergence(evolved: EvolvedDensity, t, grid=None) -> float:
    """Change of the minimum eigenvalue when the node count is doubled."""
    x = suggest_grid(evolved, t) if grid is None else np.asarray(grid, dtype=float)
    a = min_kernel_eigenvalue(evolved, t, x)
    b = min_kernel_eigenvalue(evolved, t, refined_grid(x))
    return abs(a.min_eigenvalue - b.min_eigenvalue)


def sinc_derivative_matrix(n: int, dx: float) -> np.ndarray:
    """Band-limited d/dx on a uniform grid: D_ij = (-1)^(i-j) / ((i - j) dx), D_ii = 0."""
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore"):
        D = np.where(diff == 0, 0.0, (-1.0) ** diff / (diff * dx))
    return D


@dataclass(frozen=True)
class RateCheck:
    t: float
    purity: float
    rate_fd: float
    f1: float
    f2: float
    rate_identity: float

    @property
    def residual(self) -> float:
        return self.rate_fd - self.rate_identity


def grid_functionals(evolved: EvolvedDensity, t, grid=None):
    """(P, F1, F2) from the grid density operator.

    F1 = Tr[(x rho)(p rho)] - Tr[(xp + px) rho^2]/2 + P/2,
    F2 = 4 D_pp Tr[(x rho)^2 - x^2 rho^2].
    """
    x = suggest_grid(evolved, t) if grid is None else np.asarray(grid, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelCoverageWarning)
        ker = rho_position_grid(evolved, t, x)
    rho = ker.operator
    X = np.diag(x)
    Pm = -1j * sinc_derivative_matrix(x.size, ker.dx)
    xr = X @ rho
    pr = Pm @ rho
    rho2 = rho @ rho
    pur = float(np.trace(rho2).real)
    f1 = np.trace(xr @ pr) - 0.5 * np.trace((X @ Pm + Pm @ X) @ rho2) + 0.5 * pur
    f2 = 4 * evolved.params.d_pp * np.trace(xr @ xr - X @ X @ rho2)
    return pur, float(f1.real), float(f2.real)


def purity_rate_check(evolved: EvolvedDensity, t, grid=None, dt=1e-4, quad: QuadratureSpec | None = None) -> RateCheck:
    """Residual of dP/dt = (2 gamma - 4 D_px) P + 8 D_px F1 + F2.

    dP/dt is a central difference of the Plancherel purity; P, F1 and F2
    come from the grid kernel.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    dt = min(dt, t / 2)
    rate = (purity(evolved, t + dt, quad).value - purity(evolved, t - dt, quad).value) / (2 * dt)
    pur, f1, f2 = grid_functionals(evolved, t, grid)
    p = evolved.params
    ident = (2 * p.gamma - 4 * p.d_px) * pur + 8 * p.d_px * f1 + f2
    return RateCheck(float(t), pur, rate, f1, f2, ident)


@dataclass(frozen=True)
class MonotonicityReport:
    taus: np.ndarray
    dpdT: np.ndarray
    delta_T: float
    tol: float = 1e-6

    @property
    def max_excursion(self) -> float:
        return float(max(0.0, np.max(self.dpdT)))

    @property
    def passed(self) -> bool:
        return self.max_excursion <= self.tol


def temperature_monotonicity_check(evolved: EvolvedDensity, tau_samples=(0.5, 1, 2, 5, 20), delta_T=1e-3,
                                   quad: QuadratureSpec | None = None, tol=1e-6) -> MonotonicityReport:
    """Central-difference dP/dT at each tau; reports the largest positive value."""
    p = evolved.params
    if p.case.value not in ("I", "II", "III"):
        raise DomainError(f"temperature check needs case I, II or III, got {p.case.value}")
    if not delta_T > 0 or not delta_T < p.temperature:
        raise DomainError(f"delta_T must lie in (0, T), got {delta_T}")
    hi = EvolvedDensity(evolved.state, p.with_temperature(p.temperature + delta_T))
    lo = EvolvedDensity(evolved.state, p.with_temperature(p.temperature - delta_T))
    taus = np.asarray(tau_samples, dtype=float)
    vals = np.array([(purity(hi, tau, quad).value - purity(lo, tau, quad).value) / (2 * delta_T) for tau in taus])
    return MonotonicityReport(taus, vals, delta_T, tol)
