"""Oscillator/bath parameters and the characteristic-curve algebra.

Units are hbar = m = k_B = 1. With ``omega = 1`` every quantity is the
dimensionless one used in the figures: gamma' = gamma/omega,
T' = k_B T/(hbar omega), Omega' = Omega/omega, tau = omega t.

The Fourier density rho(K, r, t) (K conjugate to the centre-of-mass
coordinate R, r the relative coordinate) is transported along the curves

    dr/dt = 2 gamma r - K,   dK/dt = omega**2 r,
    d rho/dt = (2 D_px r K - D_pp r**2) rho,

and the exact solution is rho(K, r, t) = rho0(K0, r0) exp(E(K, r, t)).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDampingError, DomainError, ExponentOverflowError, UnsupportedCaseError

EPS_CRIT = 1e-6
DEFAULT_MAX_EXPONENT = 700.0


class Case(str, enum.Enum):
    """Diffusion-coefficient prescriptions from the literature."""

    I = "I"  # Caldeira-Leggett
    II = "II"  # Markovian limit of the non-Markovian equation
    III = "III"  # medium-temperature Lindblad equation, truncated
    IV = "IV"  # phenomenological zero-temperature equation, truncated
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, value) -> "Case":
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for member in cls:
            if text.lower() in (member.value.lower(), member.name.lower()):
                return member
        raise ValueError(f"unknown case {value!r}; expected one of I, II, III, IV, Custom")


def diffusion_coefficients(case, gamma, temperature=None, cutoff=None, omega=1.0):
    """Return ``(D_pp, D_px)`` for one of the diffusion cases I-IV.

    >>> diffusion_coefficients("I", 0.35, 0.5)
    (0.35, 0.0)
    """
    case = Case.parse(case)
    if case is Case.IV:
        if not gamma < omega:
            raise DomainError(f"case IV needs omega > gamma (sqrt(omega^2 - gamma^2)); got gamma={gamma}, omega={omega}")
        root = math.sqrt(omega * omega - gamma * gamma)
        return gamma * omega * omega / (2.0 * root), gamma * gamma / root
    if case is Case.CUSTOM:
        raise UnsupportedCaseError("Custom diffusion coefficients are supplied directly, not computed")
    if temperature is None or temperature <= 0:
        raise DomainError(f"case {case.value} needs temperature > 0, got {temperature}")
    d_pp = 2.0 * gamma * temperature
    if case is Case.I:
        return d_pp, 0.0
    if cutoff is None or cutoff <= 0:
        raise DomainError(f"case {case.value} needs cutoff > 0, got {cutoff}")
    if case is Case.II:
        return d_pp, -gamma * temperature / cutoff
    return d_pp, cutoff * gamma / (6.0 * math.pi * temperature)


def diffusion_temperature_derivatives(case, gamma, temperature, cutoff=None):
    """d(D_pp)/dT and d(D_px)/dT for the temperature-dependent cases."""
    case = Case.parse(case)
    if case is Case.I:
        return 2.0 * gamma, 0.0
    if case is Case.II:
        return 2.0 * gamma, -gamma / cutoff
    if case is Case.III:
        return 2.0 * gamma, -cutoff * gamma / (6.0 * math.pi * temperature**2)
    raise UnsupportedCaseError(f"case {case.value} has no temperature dependence")


@dataclass(frozen=True)
class ModelParams:
    """Oscillator and bath parameters.

    ``d_pp`` and ``d_px`` are recomputed from the case formulas on every
    access; only ``Case.CUSTOM`` stores them (in ``custom_diffusion``).
    """

    gamma: float
    omega: float = 1.0
    temperature: float | None = None
    cutoff: float | None = None
    case: Case = Case.I
    custom_diffusion: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "case", Case.parse(self.case))
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if self.case is Case.CUSTOM:
            if self.custom_diffusion is None:
                raise DomainError("case Custom needs custom_diffusion=(d_pp, d_px)")
            object.__setattr__(self, "custom_diffusion", tuple(float(v) for v in self.custom_diffusion))
        else:
            # validates temperature/cutoff/case-IV domain
            diffusion_coefficients(self.case, self.gamma, self.temperature, self.cutoff, self.omega)
        if abs(self.gamma**2 - self.omega**2) <= EPS_CRIT:
            raise DegenerateDampingError(
                f"|gamma^2 - omega^2| = {abs(self.gamma**2 - self.omega**2):.3g} <= eps_crit={EPS_CRIT}"
            )

    @property
    def diffusion(self) -> tuple[float, float]:
        if self.case is Case.CUSTOM:
            return self.custom_diffusion
        return diffusion_coefficients(self.case, self.gamma, self.temperature, self.cutoff, self.omega)

    @property
    def d_pp(self) -> float:
        return self.diffusion[0]

    @property
    def d_px(self) -> float:
        return self.diffusion[1]

    def with_temperature(self, temperature: float) -> "ModelParams":
        return dataclasses.replace(self, temperature=temperature)

    def roots(self) -> "CharRoots":
        return char_roots(self.gamma, self.omega)


@dataclass(frozen=True)
class CharRoots:
    """X = gamma^2 - omega^2, its principal square root and lambda_{1,2} = gamma +- sqrt(X)."""

    x_disc: complex
    sqrt_x: complex
    lambda1: complex
    lambda2: complex

    @property
    def gamma(self) -> float:
        return ((self.lambda1 + self.lambda2) / 2).real

    @property
    def omega_sq(self) -> float:
        return (self.lambda1 * self.lambda2).real

    @property
    def x_three_halves(self) -> complex:
        # X**(3/2) on the same branch as sqrt_x
        return self.x_disc * self.sqrt_x

    def flipped(self) -> "CharRoots":
        """The other branch of sqrt(X); every closed form is invariant under it."""
        return CharRoots(self.x_disc, -self.sqrt_x, self.lambda2, self.lambda1)


def char_roots(gamma, omega, eps_crit=EPS_CRIT) -> CharRoots:
    x = complex(gamma * gamma - omega * omega)
    if abs(x) <= eps_crit:
        raise DegenerateDampingError(
            f"critical damping: |gamma^2 - omega^2| = {abs(x):.3g} <= eps_crit={eps_crit}"
        )
    s = np.sqrt(x)
    return CharRoots(x, complex(s), complex(gamma + s), complex(gamma - s))


def backmap(K, r, t, roots: CharRoots):
    """Foot (K0, r0) at time 0 of the characteristic through (K, r) at time t.

    Written with e^{-lambda t} factors (the displayed form divides
    e^{2 sqrt(X) t} by e^{lambda1 t}) so large t does not overflow.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    K = np.asarray(K, dtype=complex)
    r = np.asarray(r, dtype=complex)
    if t == 0:
        return K.copy(), r.copy()
    s, g, w2 = roots.sqrt_x, roots.gamma, roots.omega_sq
    e1 = np.exp(-roots.lambda1 * t)
    e2 = np.exp(-roots.lambda2 * t)
    K0 = (((s + g) * K - w2 * r) * e2 + ((s - g) * K + w2 * r) * e1) / (2 * s)
    r0 = (((s - g) * r + K) * e2 + ((s + g) * r - K) * e1) / (2 * s)
    return K0, r0


def backmap_matrix(t, roots: CharRoots) -> np.ndarray:
    """2x2 matrix L with (K0, r0) = L @ (K, r)."""
    K0, r0 = backmap(np.array([1.0, 0.0]), np.array([0.0, 1.0]), t, roots)
    return np.array([[K0[0], K0[1]], [r0[0], r0[1]]])


def _ab_terms(K, r, roots: CharRoots):
    # Coefficients of the four exponentials in A and B, in the order
    # e^{2t(2 sqrt X + gamma)}, e^{2t sqrt X}, e^{4t sqrt X}, e^{6t sqrt X}.
    K = np.asarray(K, dtype=complex)
    r = np.asarray(r, dtype=complex)
    g, w2, s, X = roots.gamma, roots.omega_sq, roots.sqrt_x, roots.x_disc
    X32 = roots.x_three_halves
    rr, KK, Kr = r * r, K * K, K * r
    a = (
        2 * X32 * (w2 * rr + KK),
        ((-g * w2 * rr + 2 * w2 * Kr - KK * g) * s + X * (-w2 * rr + KK)) * g,
        2 * w2 * s * (w2 * rr - 2 * g * Kr + KK),
        -((g * w2 * rr - 2 * w2 * Kr + KK * g) * s + X * (-w2 * rr + KK)) * g,
    )
    b = (
        -8 * X32 * g * KK,
        (((4 * g * g - 2 * w2) * KK - 4 * w2 * g * Kr + 2 * w2 * w2 * rr) * s + X * (4 * w2 * Kr - 4 * KK * g)) * g,
        -4 * w2 * s * (w2 * rr - 2 * g * Kr + KK) * g,
        -((((-4 * g * g + 2 * w2) * KK + 4 * w2 * g * Kr - 2 * w2 * w2 * rr) * s + X * (4 * w2 * Kr - 4 * KK * g)) * g),
    )
    return a, b


def exponent_ab(K, r, t, roots: CharRoots):
    """The two auxiliary expressions (A, B) of the exact solution, unscaled.

    These grow like e^{2t(2 sqrt X + gamma)}; use :func:`propagator_exponent`
    for anything but inspection at moderate t.
    """
    s, g = roots.sqrt_x, roots.gamma
    a, b = _ab_terms(K, r, roots)
    ex = (np.exp(2 * t * (2 * s + g)), np.exp(2 * t * s), np.exp(4 * t * s), np.exp(6 * t * s))
    A = sum(c * e for c, e in zip(a, ex))
    B = sum(c * e for c, e in zip(b, ex))
    return A, B


def scaled_exponent_ab(K, r, t, roots: CharRoots):
    """(A, B) multiplied by e^{-2t(2 sqrt X + gamma)}, with the exponentials combined."""
    s, g = roots.sqrt_x, roots.gamma
    a, b = _ab_terms(K, r, roots)
    ex = (1.0, np.exp(-2 * t * (s + g)), np.exp(-2 * g * t), np.exp(2 * t * (s - g)))
    A = sum(c * e for c, e in zip(a, ex))
    B = sum(c * e for c, e in zip(b, ex))
    return A, B


def propagator_exponent(K, r, t, params: ModelParams, roots: CharRoots | None = None,
                        diffusion=None, max_real=DEFAULT_MAX_EXPONENT):
    """E(K, r, t) with rho(K, r, t) = rho0(K0, r0) * exp(E).

    ``diffusion`` overrides ``(D_pp, D_px)``; E is linear in them, which the
    temperature derivative uses. Raises :class:`ExponentOverflowError` when
    ``Re E`` exceeds ``max_real`` (pass ``None`` to disable).
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    roots = roots or params.roots()
    d_pp, d_px = params.diffusion if diffusion is None else diffusion
    if t == 0:
        # the four terms cancel analytically; avoid returning rounding residue
        return np.zeros(np.broadcast(np.asarray(K), np.asarray(r)).shape, dtype=complex)
    A, B = scaled_exponent_ab(K, r, t, roots)
    den = 8 * roots.x_three_halves * roots.gamma * roots.omega_sq
    E = -(A * d_pp + B * d_px) / den
    if max_real is not None and np.size(E):
        worst = float(np.max(E.real))
        if worst > max_real:
            raise ExponentOverflowError(worst, max_real)
    return E


def exponent_quadratic_form(t, params: ModelParams, roots: CharRoots | None = None, diffusion=None):
    """Symmetric S with E(K, r, t) = (K, r) S (K, r)^T, read off by polarisation."""
    vals = propagator_exponent(np.array([1.0, 0.0, 1.0]), np.array([0.0, 1.0, 1.0]), t, params,
                               roots=roots, diffusion=diffusion, max_real=None)
    e_kk, e_rr = vals[0], vals[1]
    half_cross = (vals[2] - e_kk - e_rr) / 2
    return np.array([[e_kk, half_cross], [half_cross, e_rr]])


def _require_t_dependent(params: ModelParams):
    if params.case not in (Case.II, Case.III):
        raise UnsupportedCaseError(f"temperature-derivative integrand is defined for cases II and III, not {params.case.value}")
    return diffusion_temperature_derivatives(params.case, params.gamma, params.temperature, params.cutoff)


def temperature_derivative_integrand(K, r, t, params: ModelParams, roots: CharRoots | None = None):
    """H(K, r, t) = 2 Re dE/dT, the weight in d(purity)/dT = integral |rho|^2 H.

    E is linear in (D_pp, D_px), so dE/dT is E evaluated with the
    temperature derivatives of the coefficients. H vanishes at t = 0 and
    tends to :func:`temperature_derivative_limit` as t -> infinity.
    """
    derivs = _require_t_dependent(params)
    E_T = propagator_exponent(K, r, t, params, roots=roots, diffusion=derivs, max_real=None)
    return 2 * E_T.real


def temperature_derivative_limit(K, r, params: ModelParams):
    """Long-time limit of H: the constants c (case II) and k(K, r) (case III)."""
    dpp_T, dpx_T = _require_t_dependent(params)
    K = np.asarray(K, dtype=float)
    r = np.asarray(r, dtype=float)
    w2, g = params.omega**2, params.gamma
    return 2 * (-(w2 * r * r + K * K) * dpp_T / (4 * g * w2) + K * K * dpx_T / w2)
