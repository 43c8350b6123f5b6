"""Exception hierarchy shared by all modules."""


class PoschlTellerError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParameterError(PoschlTellerError, ValueError):
    """A parameter is outside its admissible range."""


class DomainError(PoschlTellerError, ValueError):
    """Evaluation requested at a point where the quantity is undefined."""


class PreconditionError(PoschlTellerError, ValueError):
    """Inputs do not satisfy the documented preconditions (e.g. grid too narrow)."""


class ResolutionError(PreconditionError):
    """A band or frequency is not resolvable on the requested grid."""


class RefinementRequiredError(PreconditionError):
    """The k-quadrature is too coarse to resolve a propagator phase."""


class DomainTooSmallError(PreconditionError):
    """Evolved mass reaches the edge of the spatial grid."""


class IntegrationError(PoschlTellerError, RuntimeError):
    """The ODE integrator failed; ``location`` holds the abscissa where it stopped."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ExtractionError(PoschlTellerError, RuntimeError):
    """Asymptotic phase fit did not meet its residual threshold."""


class ConfigError(PoschlTellerError, ValueError):
    """Malformed or unknown configuration entry."""
