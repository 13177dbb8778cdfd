"""Exception types shared across the package."""


class FlowLabError(Exception):
    """Base class for all package-specific errors."""


class ExpressionError(FlowLabError):
    """Field expression failed to parse or uses unsupported syntax."""


class EvaluationError(FlowLabError):
    """A field evaluation produced a non-finite intermediate value."""

    def __init__(self, message, subexpression=None):
        super().__init__(message)
        self.subexpression = subexpression


class NewtonError(FlowLabError):
    """A Newton iteration failed to converge."""

    def __init__(self, message, last_iterate=None, residual=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class ReductionError(FlowLabError):
    """The kernel-splitting construction does not apply to this input."""


class FlowError(FlowLabError):
    """Invalid flow specification or trajectory precondition."""


class InsufficientDataError(FlowLabError):
    """Not enough usable samples for a fit or membership test."""


class GaugeFixError(FlowLabError):
    """Gauge fixing failed to reach the requested residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class LatticeLogError(FlowLabError):
    """Group logarithm undefined: configurations too far apart."""


class ConfigError(FlowLabError):
    """Run configuration failed schema validation."""
