"""Exception types shared across the package."""


class ConicwaveError(Exception):
    """Base class for all package errors."""


class ConfigError(ConicwaveError):
    """Invalid or malformed run configuration."""


class DomainError(ConicwaveError):
    """Argument outside the domain an evaluator was built for."""


class ConvergenceError(ConicwaveError):
    """An iterative solver failed to reach its tolerance."""


class QuadratureError(ConicwaveError):
    """A quadrature could not reach the requested error target."""
