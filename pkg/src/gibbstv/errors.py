"""Exception types raised across the package."""


class GibbsError(Exception):
    """Base class for all package errors."""


class ParameterError(GibbsError, ValueError):
    """Invalid or inconsistent model / bound parameters."""


class StabilityError(GibbsError):
    """A model lacks the finite envelope an operation needs."""


class DivergenceError(GibbsError):
    """A series or bound is infinite for the requested inputs."""


class ExplosionError(GibbsError):
    """A simulated chain exceeded its level cap."""


class WindowTooSmallError(GibbsError):
    """An eroded window has zero volume."""


class QuadratureError(GibbsError):
    """Adaptive quadrature ran out of budget before reaching its tolerance."""

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error
