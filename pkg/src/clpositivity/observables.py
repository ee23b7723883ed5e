"""Purity, phase-space moments and the Robertson-Schroedinger functional.

Purity is the Plancherel integral P(t) = int int |rho(K, r, t)|^2 dK dr.
Moments need rho and its derivatives at K = r = 0 only: integrating
e^{iKR} over R leaves a delta in K, so with the reconstruction sign used in
:mod:`clpositivity.evolution`

    <x>   = -i sqrt(2 pi) d_K rho        <x^2> = -sqrt(2 pi) d_K^2 rho
    <p>   = -i sqrt(2 pi) d_r rho        <p^2> = -sqrt(2 pi) d_r^2 rho
    <xp + px>/2 = -sqrt(2 pi) d_K d_r rho

all evaluated at the origin.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, QuadratureError
from .evolution import SQRT_2PI, EvolvedDensity, closed_form, rho_fourier
from .model import propagator_exponent, diffusion_temperature_derivatives

FLAG_TOL = 1e-6
MIN_NODES = 16


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre settings for the Plancherel integral.

    With both half-widths left as ``None`` the domain is chosen from the
    Gaussian envelope of |rho|^2: the integral is taken in whitened
    coordinates over +- ``n_sigma`` standard deviations. Explicit
    half-widths give a plain rectangle in (K, r).
    """

    half_width_K: float | None = None
    half_width_r: float | None = None
    nodes_K: int = 64
    nodes_r: int = 64
    refine_tol: float = 1e-10
    max_nodes: int = 1024
    n_sigma: float = 10.0

    def __post_init__(self):
        for name in ("half_width_K", "half_width_r"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be > 0, got {v}")
        if (self.half_width_K is None) != (self.half_width_r is None):
            raise DomainError("give both half_width_K and half_width_r, or neither")
        for name in ("nodes_K", "nodes_r"):
            if getattr(self, name) < MIN_NODES:
                raise DomainError(f"{name} must be >= {MIN_NODES}, got {getattr(self, name)}")
        if self.max_nodes < max(self.nodes_K, self.nodes_r):
            raise DomainError("max_nodes must be at least the starting node count")
        if not self.refine_tol > 0:
            raise DomainError(f"refine_tol must be > 0, got {self.refine_tol}")
        if not self.n_sigma > 0:
            raise DomainError(f"n_sigma must be > 0, got {self.n_sigma}")


@dataclass(frozen=True)
class PurityEstimate:
    value: float
    error: float
    nodes: tuple[int, int]

    def __float__(self):
        return self.value


def _envelope_map(evolved: EvolvedDensity, t):
    """Linear map W and its |det| taking the unit box to the support of |rho|^2."""
    q = closed_form(evolved, t).quad.real
    # |rho|^2 ~ exp(-2 v.Re(Q).v): covariance (4 Re Q)^{-1}
    cov = np.linalg.inv(4.0 * q)
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] <= 0:
        raise DomainError(f"|rho|^2 does not decay at t={t}")
    W = evecs * np.sqrt(evals)
    return W, float(np.sqrt(evals).prod())


def _integrate(fn, evolved, t, quad: QuadratureSpec, nk, nr):
    uk, wk = leggauss(nk)
    ur, wr = leggauss(nr)
    if quad.half_width_K is None:
        W, jac = _envelope_map(evolved, t)
        a, b = np.meshgrid(quad.n_sigma * uk, quad.n_sigma * ur, indexing="ij")
        K = W[0, 0] * a + W[0, 1] * b
        r = W[1, 0] * a + W[1, 1] * b
        scale = jac * quad.n_sigma**2
    else:
        K, r = np.meshgrid(quad.half_width_K * uk, quad.half_width_r * ur, indexing="ij")
        scale = quad.half_width_K * quad.half_width_r
    return scale * float(np.einsum("i,ij,j->", wk, fn(K, r), wr))


def _refine(fn, evolved, t, quad: QuadratureSpec, what) -> PurityEstimate:
    nk, nr = quad.nodes_K, quad.nodes_r
    prev = _integrate(fn, evolved, t, quad, nk, nr)
    history = [prev]
    while 2 * max(nk, nr) <= quad.max_nodes:
        nk, nr = 2 * nk, 2 * nr
        cur = _integrate(fn, evolved, t, quad, nk, nr)
        history.append(cur)
        err = abs(cur - prev)
        if err <= quad.refine_tol * max(abs(cur), 1e-300) or err == 0.0:
            return PurityEstimate(cur, err, (nk, nr))
        prev = cur
    raise QuadratureError(f"{what} at t={t} did not converge to {quad.refine_tol:g} within {quad.max_nodes} nodes",
                          history[-2:])


def purity(evolved: EvolvedDensity, t, quad: QuadratureSpec | None = None) -> PurityEstimate:
    """Plancherel purity with doubling refinement; ``error`` is the last change."""
    quad = quad or QuadratureSpec()

    def integrand(K, r):
        return np.abs(rho_fourier(evolved, K, r, t)) ** 2

    return _refine(integrand, evolved, t, quad, "purity")


def purity_temperature_derivative(evolved: EvolvedDensity, t, quad: QuadratureSpec | None = None) -> PurityEstimate:
    """dP/dT = int int |rho|^2 * 2 Re(dE/dT); cases I-III.

    Only the exponent depends on T (the initial state does not), so this is
    exact up to quadrature.
    """
    quad = quad or QuadratureSpec()
    p = evolved.params
    derivs = diffusion_temperature_derivatives(p.case, p.gamma, p.temperature, p.cutoff)
    roots = evolved.roots

    def integrand(K, r):
        e_t = propagator_exponent(K, r, t, p, roots=roots, diffusion=derivs, max_real=None)
        return np.abs(rho_fourier(evolved, K, r, t)) ** 2 * 2 * e_t.real

    return _refine(integrand, evolved, t, quad, "dP/dT")


@dataclass(frozen=True)
class MomentSet:
    mean_x: float
    mean_x2: float
    mean_p: float
    mean_p2: float
    sym_xp: float

    @property
    def var_x(self) -> float:
        return self.mean_x2 - self.mean_x**2

    @property
    def var_p(self) -> float:
        return self.mean_p2 - self.mean_p**2

    @property
    def cov_xp(self) -> float:
        return self.sym_xp - self.mean_x * self.mean_p

    @property
    def negative_variance(self) -> bool:
        """Diagnostic: a true density never has a negative variance."""
        return self.var_x < 0 or self.var_p < 0


def _derivatives_fd(evolved, t, h):
    def f(k, r):
        return complex(rho_fourier(evolved, k, r, t))

    f0 = f(0.0, 0.0)
    dk = (f(h, 0) - f(-h, 0)) / (2 * h)
    dr = (f(0, h) - f(0, -h)) / (2 * h)
    dkk = (f(h, 0) - 2 * f0 + f(-h, 0)) / h**2
    drr = (f(0, h) - 2 * f0 + f(0, -h)) / h**2
    dkr = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    return dk, dkk, dr, drr, dkr


def moments(evolved: EvolvedDensity, t, method: str = "analytic", h: float = 1e-4) -> MomentSet:
    """The five moments from derivatives of rho(K, r, t) at the origin.

    ``method="analytic"`` differentiates the closed polynomial x Gaussian form;
    ``"fd"`` uses central differences with step ``h``.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if method == "analytic":
        form = closed_form(evolved, t)
        tay = form.taylor(2)
        dk, dkk, dr, drr, dkr = tay[1, 0], 2 * tay[2, 0], tay[0, 1], 2 * tay[0, 2], tay[1, 1]
    elif method == "fd":
        dk, dkk, dr, drr, dkr = _derivatives_fd(evolved, t, h)
    else:
        raise ValueError(f"method must be 'analytic' or 'fd', got {method!r}")
    return MomentSet(
        mean_x=float((-1j * SQRT_2PI * dk).real),
        mean_x2=float((-SQRT_2PI * dkk).real),
        mean_p=float((-1j * SQRT_2PI * dr).real),
        mean_p2=float((-SQRT_2PI * drr).real),
        sym_xp=float((-SQRT_2PI * dkr).real),
    )


def sigma_rs(m: MomentSet) -> float:
    """sigma_RS = Var(x) Var(p) - Cov(x, p)^2; physical states have 4 sigma_RS >= 1."""
    return m.var_x * m.var_p - m.cov_xp**2


@dataclass(frozen=True)
class ObservableSeries:
    times: np.ndarray
    purity: np.ndarray
    purity_err: np.ndarray
    sigma_rs_4: np.ndarray
    purity_violation: np.ndarray
    uncertainty_violation: np.ndarray
    failed: np.ndarray
    moments: tuple = field(default=(), repr=False)
    flag_tol: float = FLAG_TOL

    @property
    def any_failed(self) -> bool:
        return bool(self.failed.any())


def default_time_grid(gamma, samples=400, t_start=1e-3, t_end=None, log_spacing=True) -> np.ndarray:
    """``samples`` points on [t_start, 50/gamma] (log-spaced by default)."""
    if t_end is None:
        t_end = 50.0 / gamma
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if not 0 < t_start < t_end:
        raise DomainError(f"need 0 < t_start < t_end, got {t_start}, {t_end}")
    if log_spacing:
        return np.geomspace(t_start, t_end, samples)
    return np.linspace(t_start, t_end, samples)


def _sample(evolved, t, quad):
    m = moments(evolved, t)
    try:
        p = purity(evolved, t, quad)
        return p.value, p.error, 4 * sigma_rs(m), m, False
    except QuadratureError as exc:
        return math.nan, math.nan, 4 * sigma_rs(m), m, exc


def scan(evolved: EvolvedDensity, t_grid, quad: QuadratureSpec | None = None, flag_tol=FLAG_TOL,
         workers: int = 1) -> ObservableSeries:
    """Purity and 4 sigma_RS on ``t_grid`` with violation flags.

    Samples whose quadrature fails are marked in ``failed`` (purity NaN,
    never flagged). Output order follows ``t_grid`` for any ``workers``.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("t_grid must be a non-empty 1-D sequence")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise DomainError("t_grid must be strictly ascending with t_grid[0] >= 0")
    quad = quad or QuadratureSpec()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _sample(evolved, t, quad), times))
    else:
        rows = [_sample(evolved, t, quad) for t in times]
    pur = np.array([row[0] for row in rows])
    err = np.array([row[1] for row in rows])
    s4 = np.array([row[2] for row in rows])
    failed = np.array([row[4] is not False for row in rows])
    return ObservableSeries(
        times=times,
        purity=pur,
        purity_err=err,
        sigma_rs_4=s4,
        purity_violation=np.where(failed, False, pur > 1 + flag_tol),
        uncertainty_violation=s4 < 1 - flag_tol,
        failed=failed,
        moments=tuple(row[3] for row in rows),
        flag_tol=flag_tol,
    )
