"""Stationary kernel, its spectrum, minimum temperatures and pure-state width bounds.

Dimensionless units (hbar = m = k_B = 1). The stationary kernel is the
Gaussian

    rho(x, y) = sqrt(gamma) omega / sqrt(pi Delta)
                * exp(-gamma omega^2 (x + y)^2 / (4 Delta) - D_pp (x - y)^2 / (4 gamma)),

with Delta = D_pp - 4 gamma D_px. Writing A = D_pp/(4 gamma) and
C = gamma omega^2/(4 Delta), its eigenvalues are eps0 * eps**n with
eps0 = 2 sqrt(C)/(sqrt(A) + sqrt(C)) and eps = (sqrt(A) - sqrt(C))/(sqrt(A) + sqrt(C)),
so the kernel is a density operator iff A >= C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError, UnsupportedCaseError
from .model import Case, ModelParams, diffusion_coefficients


@dataclass(frozen=True)
class Infeasible:
    """Returned instead of a temperature when no temperature makes the model positive."""

    reason: str

    def __str__(self):
        return "infeasible"

    def __bool__(self):
        return False


def _delta(params: ModelParams) -> float:
    return params.d_pp - 4 * params.gamma * params.d_px


def steady_kernel(params: ModelParams, x, y):
    """Stationary position kernel rho_inf(x, y)."""
    delta = _delta(params)
    if not delta > 0:
        raise InfeasibleError(f"D_pp - 4 gamma D_px = {delta:.6g} <= 0: no normalisable stationary kernel")
    g, w, d_pp = params.gamma, params.omega, params.d_pp
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pref = math.sqrt(g) * w / math.sqrt(math.pi * delta)
    return pref * np.exp(-g * w * w * (x + y) ** 2 / (4 * delta) - d_pp * (x - y) ** 2 / (4 * g))


@dataclass(frozen=True)
class SteadySpectrum:
    a_coef: float
    c_coef: float

    @property
    def eps0(self) -> float:
        sa, sc = math.sqrt(self.a_coef), math.sqrt(self.c_coef)
        return 2 * sc / (sa + sc)

    @property
    def eps(self) -> float:
        sa, sc = math.sqrt(self.a_coef), math.sqrt(self.c_coef)
        return (sa - sc) / (sa + sc)

    @property
    def purity(self) -> float:
        return math.sqrt(self.c_coef / self.a_coef)

    @property
    def total(self) -> float:
        """Sum over all eigenvalues, eps0/(1 - eps); equals one."""
        return self.eps0 / (1 - self.eps)

    @property
    def positive(self) -> bool:
        return self.a_coef >= self.c_coef

    def eigenvalues(self, count: int) -> np.ndarray:
        return self.eps0 * self.eps ** np.arange(count)


def steady_spectrum(params: ModelParams) -> SteadySpectrum:
    delta = _delta(params)
    if not delta > 0:
        raise InfeasibleError(f"C = gamma omega^2/(4 (D_pp - 4 gamma D_px)) undefined: denominator {delta:.6g} <= 0")
    if not params.d_pp > 0:
        raise InfeasibleError(f"A = D_pp/(4 gamma) must be positive, got D_pp={params.d_pp}")
    return SteadySpectrum(params.d_pp / (4 * params.gamma), params.gamma * params.omega**2 / (4 * delta))


def positivity_condition(params: ModelParams, rtol: float = 1e-12) -> bool:
    """D_pp^2 - 4 gamma D_pp D_px >= gamma^2 omega^2 (equality counts, up to ``rtol``)."""
    lhs = params.d_pp**2 - 4 * params.gamma * params.d_pp * params.d_px
    rhs = (params.gamma * params.omega) ** 2
    return lhs >= rhs * (1 - rtol)


def t_min(case, gamma, omega=1.0, cutoff=None):
    """Minimum bath temperature per case, using the standard closed forms.

    Case III follows the closed-form expression; :func:`positivity_threshold`
    gives the value solved directly from :func:`positivity_condition`.
    """
    case = Case.parse(case)
    if case is Case.I:
        return omega / 2
    if case is Case.IV:
        return Infeasible("case IV violates positivity for every gamma < omega")
    if case is Case.CUSTOM:
        raise UnsupportedCaseError("t_min needs a temperature-dependent case")
    if cutoff is None or not cutoff > 0:
        raise DomainError(f"case {case.value} needs cutoff > 0, got {cutoff}")
    if not gamma >= 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if case is Case.II:
        return omega / (2 * math.sqrt(1 + 2 * gamma / cutoff))
    return omega / 2 * math.sqrt(1 + 2 * cutoff * gamma / (3 * math.pi * omega**2))


def positivity_threshold(case, gamma, omega=1.0, cutoff=None):
    """Temperature where ``positivity_condition`` becomes an equality (cases I-III)."""
    case = Case.parse(case)
    if case in (Case.I, Case.II, Case.IV):
        return t_min(case, gamma, omega, cutoff)
    if case is Case.III:
        if cutoff is None or not cutoff > 0:
            raise DomainError(f"case III needs cutoff > 0, got {cutoff}")
        return omega / 2 * math.sqrt(1 + 4 * cutoff * gamma / (3 * math.pi * omega**2))
    raise UnsupportedCaseError("positivity_threshold needs a temperature-dependent case")


@dataclass(frozen=True)
class WidthCondition:
    """Lower bound on the position width of a pure state that keeps dP/dt <= 0.

    From gamma - 2 (D_pp sigma_xx^2 + 2 D_px sigma_px^2) <= 0, with
    sigma_px^2 = <xp + px>/2 - <x><p>.
    """

    case: Case
    gamma: float
    d_pp: float
    d_px: float

    @property
    def sigma_px_bound(self) -> float:
        """Largest sigma_px for which the bound below is a real width (inf if D_px <= 0)."""
        if self.d_px <= 0:
            return math.inf
        return math.sqrt(self.gamma / (4 * self.d_px))

    def min_sigma_xx(self, sigma_px=0.0) -> float:
        rad = (self.gamma - 4 * self.d_px * sigma_px**2) / (2 * self.d_pp)
        if rad < 0:
            raise DomainError(f"sigma_px={sigma_px} exceeds the self-consistency bound {self.sigma_px_bound:.6g}")
        return math.sqrt(rad)


def width_condition(params: ModelParams) -> WidthCondition:
    return WidthCondition(params.case, params.gamma, params.d_pp, params.d_px)


def pure_state_condition(params: ModelParams, sigma_xx, sigma_px=0.0) -> bool:
    """Whether a pure state of widths (sigma_xx, sigma_px) starts with dP/dt <= 0.

    Evaluates gamma - 2 (D_pp sigma_xx^2 + 2 D_px sigma_px^2) <= 0. When
    D_px > 0 and sigma_px is past the self-consistency bound the width
    display has no real solution and the result is ``False``.
    """
    if not sigma_xx > 0:
        raise DomainError(f"sigma_xx must be > 0, got {sigma_xx}")
    wc = width_condition(params)
    if abs(sigma_px) > wc.sigma_px_bound:
        return False
    return params.gamma - 2 * (params.d_pp * sigma_xx**2 + 2 * params.d_px * sigma_px**2) <= 0


def case_threshold(case, gamma, temperature=None, cutoff=None, omega=1.0, sigma_px=0.0) -> float:
    """Minimum sigma_xx for the given case; convenience wrapper over :class:`WidthCondition`."""
    d_pp, d_px = diffusion_coefficients(case, gamma, temperature, cutoff, omega)
    return WidthCondition(Case.parse(case), gamma, d_pp, d_px).min_sigma_xx(sigma_px)


def pure_state_rate(params: ModelParams, sigma_xx, sigma_px=0.0) -> float:
    """dP/dt of a pure state: 2 (gamma - 2 (D_pp sigma_xx^2 + 2 D_px sigma_px^2))."""
    return 2 * (params.gamma - 2 * (params.d_pp * sigma_xx**2 + 2 * params.d_px * sigma_px**2))
