"""Exception types shared across the package."""


class NonclipError(Exception):
    """Base class for all package errors."""


class StructuralError(NonclipError):
    """Shape or kind mismatch between values that must be compatible."""


class NumericalError(NonclipError):
    """A numerical routine produced NaN/Inf or failed to converge."""


class ConfigError(NonclipError):
    """Invalid configuration (bad field, bad value, or runtime precondition)."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)


class InsufficientDataError(NonclipError):
    """Not enough valid samples to run an estimation procedure."""


class RunError(NonclipError):
    """A run aborted mid-trajectory; carries the failing iteration index."""

    def __init__(self, iteration, cause):
        self.iteration = iteration
        self.cause = cause
        super().__init__(f"run failed at iteration k={iteration}: {cause}")
