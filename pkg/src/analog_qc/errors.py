"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class AnalogQCError(Exception):
    """Base class for all package errors."""


class DomainError(AnalogQCError, ValueError):
    """An argument lies outside the domain of an operation."""


class ValidationError(AnalogQCError, ValueError):
    """An object fails a structural or physical invariant (unitarity, PSD, ...)."""


class DegenerateStateError(DomainError):
    """A measurement was attempted on a signal with zero norm."""


class UnsupportedConfigurationError(DomainError):
    """The requested operation is not available for this register size."""


class OptimizationError(AnalogQCError):
    """A local minimization did not succeed.

    The best parameters and objective value found are attached so callers
    can still inspect or use them.
    """

    def __init__(self, message, best_x=None, best_f=None, result=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_f = best_f
        self.result = result


class ConfigError(AnalogQCError):
    """An experiment configuration file or flag is invalid."""


class SeriesParseError(ConfigError):
    """A fidelity series file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line
