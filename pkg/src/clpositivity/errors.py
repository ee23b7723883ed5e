"""Exception hierarchy shared by the numerical modules."""


class DomainError(ValueError):
    """Parameters outside the region where a formula is defined."""


class DegenerateDampingError(DomainError):
    """Raised when gamma**2 - omega**2 is too close to zero (critical damping)."""


class UnsupportedCaseError(DomainError):
    pass


class InfeasibleError(DomainError):
    """The stationary kernel does not exist as a normalisable Gaussian."""


class ExponentOverflowError(ArithmeticError):
    """Real part of the propagator exponent exceeded the configured bound."""

    def __init__(self, max_real, bound):
        self.max_real = max_real
        self.bound = bound
        super().__init__(
            f"propagator exponent real part {max_real:.6g} exceeds bound {bound:.6g}; "
            "shrink the integration domain"
        )


class QuadratureError(RuntimeError):
    """Doubling refinement did not reach the requested tolerance."""

    def __init__(self, message, estimates=()):
        self.estimates = tuple(estimates)
        super().__init__(f"{message} (last estimates: {self.estimates})")


class StepSizeError(RuntimeError):
    """RK4 results at n and 2n steps disagree beyond tolerance."""
