"""Exact time-evolved Fourier density and position-space kernels.

The characteristic system transports rho(K, r, t) with K entering as
``dr/dt = 2 gamma r - K``. Matching this against the master equation in the
(R, r) representation fixes the reconstruction sign:

    rho(R, r, t) = (2 pi)^{-1/2} int dK e^{-iKR} rho(K, r, t).

Hermite-Gauss initial states are even in K, so the initial Fourier image is
the same under either sign; the sign matters for t > 0 (it decides the
orientation of <xp + px>).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError
from .model import CharRoots, ModelParams, backmap, backmap_matrix, exponent_quadratic_form, propagator_exponent
from .states import HermiteGaussState, PolyGaussian, initial_fourier_form, rho_fourier_initial

SQRT_2PI = math.sqrt(2.0 * math.pi)


class KernelCoverageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EvolvedDensity:
    state: HermiteGaussState
    params: ModelParams

    @cached_property
    def roots(self) -> CharRoots:
        return self.params.roots()


def rho_fourier(evolved: EvolvedDensity, K, r, t):
    """rho(K, r, t) = rho0(K0, r0) exp(E(K, r, t))."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    K0, r0 = backmap(K, r, t, evolved.roots)
    E = propagator_exponent(K, r, t, evolved.params, roots=evolved.roots)
    return rho_fourier_initial(evolved.state, K0, r0) * np.exp(E)


def closed_form(evolved: EvolvedDensity, t) -> PolyGaussian:
    """rho(., ., t) as polynomial x Gaussian: the initial form pulled back through
    the (linear) back-map and multiplied by exp(E), E being a quadratic form."""
    L = backmap_matrix(t, evolved.roots)
    S = exponent_quadratic_form(t, evolved.params, roots=evolved.roots)
    return initial_fourier_form(evolved.state).transformed(L).with_exponent(S)


@dataclass(frozen=True)
class PositionKernel:
    """Samples M[i, j] ~ rho(x_i, x_j, t) on a uniform symmetric grid."""

    t: float
    x: np.ndarray
    dx: float
    matrix: np.ndarray
    hermiticity_residue: float
    aliasing_estimate: float
    truncation_warning: bool

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)) * self.dx)

    @property
    def operator(self) -> np.ndarray:
        """Hermitian part of the dx-weighted kernel: the discretised density operator."""
        m = self.matrix * self.dx
        return (m + m.conj().T) / 2


def _check_grid(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise DomainError("x_nodes must be a 1-D array with at least 3 points")
    steps = np.diff(x)
    dx = float(steps.mean())
    if dx <= 0 or np.max(np.abs(steps - dx)) > 1e-9 * max(1.0, abs(dx)):
        raise DomainError("x_nodes must be uniformly spaced and increasing")
    if np.max(np.abs(x + x[::-1])) > 1e-9 * max(1.0, abs(x[-1])):
        raise DomainError("x_nodes must be symmetric about 0")
    return x, dx


def rho_position_grid(evolved: EvolvedDensity, t, x_nodes, n_sigma=10.0, k_nodes=None,
                      alias_tol=1e-8) -> PositionKernel:
    """Position-space kernel by Gauss-Legendre inverse Fourier over K.

    For fixed r the integrand is a Gaussian in K centred at -Q_Kr r / Q_KK
    with standard deviation 1/sqrt(2 Q_KK); the K-interval is that centre
    +- ``n_sigma`` standard deviations.
    """
    x, dx = _check_grid(x_nodes)
    n = x.size
    form = closed_form(evolved, t)
    q = form.quad.real
    if q[0, 0] <= 0:
        raise DomainError("evolved density does not decay in K")
    sigma_k = 1.0 / math.sqrt(2.0 * q[0, 0])
    half = n_sigma * sigma_k

    shifts = np.arange(-(n - 1), n)
    R = shifts * dx / 2
    r = shifts * dx
    k_center = -q[0, 1] * r / q[0, 0]
    if k_nodes is None:
        k_nodes = 64 + int(math.ceil(half * abs(R[-1])))
    u, w = leggauss(int(k_nodes))

    K = k_center[None, :] + half * u[:, None]  # (m, D)
    vals = rho_fourier(evolved, K, np.broadcast_to(r, K.shape), t)
    weighted = vals * (w * half)[:, None]
    phase = np.exp(-1j * np.outer(R, half * u))  # (C, m)
    table = (phase @ weighted) * np.exp(-1j * np.outer(R, k_center)) / SQRT_2PI

    i, j = np.indices((n, n))
    M = table[i + j, i - j + n - 1]
    herm = float(np.max(np.abs(M - M.conj().T)))

    # truncation of the x-support and under-resolution of the momentum content
    var_x = abs((-SQRT_2PI * form.derivative_at_origin(2, 0)).real)
    var_p = abs((-SQRT_2PI * form.derivative_at_origin(0, 2)).real)
    trunc = math.exp(-x[-1] ** 2 / (2 * var_x)) if var_x > 0 else 0.0
    resol = math.exp(-((math.pi / dx) ** 2) / (2 * var_p)) if var_p > 0 else 0.0
    alias = max(trunc, resol)
    flagged = alias > alias_tol
    if flagged:
        warnings.warn(f"kernel grid under-resolved at t={t}: estimated aliasing {alias:.2e}", KernelCoverageWarning,
                      stacklevel=2)
    return PositionKernel(float(t), x, dx, M, herm, alias, flagged)
