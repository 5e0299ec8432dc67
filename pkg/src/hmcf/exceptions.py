"""Exception types raised across the package."""


class HMCFError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(HMCFError, ValueError):
    """A parameter is outside its admissible range."""


class ContourVanishedError(HMCFError):
    """The level set function no longer changes sign anywhere on the grid."""


class StabilityError(InvalidParameterError):
    """The wave substep violates the stability bound ``sqrt(max b) * dt <= 0.6``."""


class DegenerateRegionError(HMCFError):
    """A region weight sum vanished while computing region means."""


class ConfigError(HMCFError, ValueError):
    """Malformed configuration file or value."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class FormatError(HMCFError, ValueError):
    """Unreadable or unsupported file contents."""
