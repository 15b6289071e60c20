"""Exceptions and warnings raised across PaulSim"""


class PaulSimError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(PaulSimError, ValueError):
    """Schema violation in a run config or geometry file.

    Parameters
    ----------
    message (str):
        What is wrong.
    line (int or None):
        1-based line of the offending entry in the source document, if known.
    """

    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class SpeciesLookupError(PaulSimError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ''


class DomainError(PaulSimError, ValueError):
    pass


class NumericalError(PaulSimError, ArithmeticError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class StabilityError(PaulSimError):
    """Raised when stable motion is required but some axis is unstable.

    `params` holds the offending (a, q) pairs.
    """

    def __init__(self, message, params=()):
        self.params = list(params)
        super().__init__(message)


class SolverError(PaulSimError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class AccuracyError(PaulSimError):
    pass


class SearchError(PaulSimError):
    def __init__(self, message, trace=()):
        self.trace = list(trace)
        super().__init__(message)


class NoTrapError(PaulSimError):
    pass


class ResolutionError(PaulSimError):
    pass


class ValidityError(PaulSimError):
    def __init__(self, message, mode=None):
        self.mode = mode
        super().__init__(message)


class AccuracyWarning(UserWarning):
    """Result computed, but in a region where the field model is known to be inaccurate."""


class StaleCacheWarning(UserWarning):
    """A cached result was built from different inputs and has been recomputed."""
