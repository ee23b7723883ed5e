"""Hermite-Gauss initial states and their closed-form Fourier images.

Position form, with R = (x + y)/2 and r = x - y:

    rho(R, r, 0) = H_n(bR + br/2) H_n(bR - br/2) / (2^n n!)
                   * exp(-b^2 (2R^2 + r^2/2) / 2) * sqrt(b^2/pi)

Fourier image: rho(K, r) = (2 pi)^{-1/2} int dR e^{iKR} rho(R, r), the inverse
of the reconstruction used in ``evolution``. The image is real and even in K
for these states (so the sign of the exponent is immaterial here),

    rho(K, r, 0) = (2 pi)^{-1/2} exp(-s/2) L_n(s),  s = K^2/(2b^2) + b^2 r^2/2,

which is stored as a polynomial in (K, r) times a Gaussian (:class:`PolyGaussian`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2.0 * x
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


@dataclass(frozen=True)
class HermiteGaussState:
    n: int = 0
    beta: float = 0.6

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a non-negative integer, got {self.n}")
        if not self.beta > 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def variance_x(self) -> float:
        return (self.n + 0.5) / self.beta**2

    @property
    def variance_p(self) -> float:
        return (self.n + 0.5) * self.beta**2


def rho_position(state: HermiteGaussState, R, r):
    b, n = state.beta, state.n
    R = np.asarray(R, dtype=float)
    r = np.asarray(r, dtype=float)
    herm = hermite(n, b * R + b * r / 2) * hermite(n, b * R - b * r / 2) / (2.0**n * math.factorial(n))
    return herm * np.exp(-0.5 * b * b * (2 * R * R + 0.5 * r * r)) * math.sqrt(b * b / math.pi)


def _poly2_mul(a, b):
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), dtype=complex)
    for i, j in zip(*np.nonzero(a)):
        out[i:i + b.shape[0], j:j + b.shape[1]] += a[i, j] * b
    return out


def _poly2_pow(a, k):
    out = np.ones((1, 1), dtype=complex)
    for _ in range(k):
        out = _poly2_mul(out, a)
    return out


def _poly2_add(a, b):
    out = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])), dtype=complex)
    out[:a.shape[0], :a.shape[1]] += a
    out[:b.shape[0], :b.shape[1]] += b
    return out


@dataclass(frozen=True)
class PolyGaussian:
    """prefactor * sum_ij coeffs[i, j] K^i r^j * exp(-(K, r) quad (K, r)^T).

    ``quad`` is complex symmetric; it only needs a positive-definite real
    part for the function to decay.
    """

    coeffs: np.ndarray
    quad: np.ndarray
    prefactor: float = 1.0

    def __call__(self, K, r):
        K = np.asarray(K, dtype=complex)
        r = np.asarray(r, dtype=complex)
        q = self.quad
        expo = -(q[0, 0] * K * K + 2 * q[0, 1] * K * r + q[1, 1] * r * r)
        return self.prefactor * P.polyval2d(K, r, self.coeffs) * np.exp(expo)

    def transformed(self, L) -> "PolyGaussian":
        """The function v -> self(L v)."""
        L = np.asarray(L, dtype=complex)
        k_lin = np.array([[0, L[0, 1]], [L[0, 0], 0]], dtype=complex)
        r_lin = np.array([[0, L[1, 1]], [L[1, 0], 0]], dtype=complex)
        poly = np.zeros((1, 1), dtype=complex)
        for i, j in zip(*np.nonzero(self.coeffs)):
            term = _poly2_mul(_poly2_pow(k_lin, i), _poly2_pow(r_lin, j)) * self.coeffs[i, j]
            poly = _poly2_add(poly, term)
        return PolyGaussian(poly, L.T @ self.quad @ L, self.prefactor)

    def with_exponent(self, S) -> "PolyGaussian":
        """Multiply by exp((K, r) S (K, r)^T)."""
        return PolyGaussian(self.coeffs, self.quad - np.asarray(S), self.prefactor)

    def taylor(self, order: int) -> np.ndarray:
        """Taylor coefficients at the origin up to total degree ``order`` (prefactor included)."""
        q = self.quad
        minus_q = -np.array([[0, 0, q[1, 1]], [0, 2 * q[0, 1], 0], [q[0, 0], 0, 0]], dtype=complex)
        series = np.zeros((1, 1), dtype=complex)
        term = np.ones((1, 1), dtype=complex)
        for k in range(order // 2 + 1):
            series = _poly2_add(series, term / math.factorial(k))
            term = _poly2_mul(term, minus_q)
        full = _poly2_mul(self.coeffs, series)
        out = np.zeros((order + 1, order + 1), dtype=complex)
        for i in range(min(order + 1, full.shape[0])):
            for j in range(min(order + 1 - i, full.shape[1])):
                out[i, j] = full[i, j]
        return self.prefactor * out

    def derivative_at_origin(self, i: int, j: int) -> complex:
        """d^i/dK^i d^j/dr^j evaluated at K = r = 0."""
        return self.taylor(i + j)[i, j] * math.factorial(i) * math.factorial(j)


def laguerre_coefficients(n: int) -> list[float]:
    return [(-1) ** k * math.comb(n, k) / math.factorial(k) for k in range(n + 1)]


@lru_cache(maxsize=64)
def initial_fourier_form(state: HermiteGaussState) -> PolyGaussian:
    b = state.beta
    s_poly = np.zeros((3, 3), dtype=complex)
    s_poly[2, 0] = 1 / (2 * b * b)
    s_poly[0, 2] = b * b / 2
    poly = np.zeros((1, 1), dtype=complex)
    for k, c in enumerate(laguerre_coefficients(state.n)):
        poly = _poly2_add(poly, c * _poly2_pow(s_poly, k))
    quad = np.diag([1 / (4 * b * b), b * b / 4]).astype(complex)
    return PolyGaussian(poly, quad, INV_SQRT_2PI)


def rho_fourier_initial(state: HermiteGaussState, K, r):
    return initial_fourier_form(state)(K, r)
