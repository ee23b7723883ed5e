"""Exact characteristic-curve solution of the Caldeira-Leggett master equation
for a damped harmonic oscillator, with positivity diagnostics."""

from .errors import (DegenerateDampingError, DomainError, ExponentOverflowError, InfeasibleError, QuadratureError,
                     StepSizeError, UnsupportedCaseError)
from .evolution import EvolvedDensity, PositionKernel, closed_form, rho_fourier, rho_position_grid
from .model import (Case, CharRoots, ModelParams, backmap, char_roots, diffusion_coefficients, exponent_ab,
                    propagator_exponent, temperature_derivative_integrand, temperature_derivative_limit)
from .observables import (MomentSet, ObservableSeries, PurityEstimate, QuadratureSpec, default_time_grid, moments,
                          purity, scan, sigma_rs)
from .oracle import (GridEigenReport, equivalence_lattice, min_kernel_eigenvalue, propagate_characteristic_numeric,
                     purity_rate_check, temperature_monotonicity_check)
from .states import HermiteGaussState, hermite, rho_fourier_initial, rho_position
from .steady import (Infeasible, SteadySpectrum, WidthCondition, positivity_condition, positivity_threshold,
                     pure_state_condition, steady_kernel, steady_spectrum, t_min, width_condition)

__version__ = "0.1.0"
