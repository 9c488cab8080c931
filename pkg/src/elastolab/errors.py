"""Exception hierarchy shared by all elastolab modules."""


class ElastoError(Exception):
    """Base class for every error raised by elastolab."""


class DomainError(ElastoError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedOrderError(ElastoError, ValueError):
    """Bessel order out of range, or the result would overflow."""


class SingularityError(ElastoError, ValueError):
    """A kernel was evaluated at coincident source and target points."""


class NearSingularError(ElastoError, ValueError):
    """Target too close to the boundary for plain trapezoidal evaluation."""


class InvalidGeometryError(ElastoError, ValueError):
    """Curve parameters violate the simplicity or containment invariants."""


class UndersamplingError(ElastoError, ValueError):
    """Sampling density too low for the requested accuracy."""


class InvalidAprioriDataError(ElastoError, ValueError):
    """The a-priori constants are inconsistent (for example H0 >= H1)."""


class QuadratureError(ElastoError, RuntimeError):
    """Quadrature failed its resolution-doubling convergence test."""


class SolverError(ElastoError, RuntimeError):
    """Numerically singular linear system."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class AccuracyError(ElastoError, RuntimeError):
    """Boundary residual did not reach the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(ElastoError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class SweepAborted(ElastoError, RuntimeError):
    """A sweep stopped early; ``partial`` holds the records computed so far."""

    def __init__(self, message, partial=None, cause=None):
        super().__init__(message)
        self.partial = partial
        self.cause = cause
