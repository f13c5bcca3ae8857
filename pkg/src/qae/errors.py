"""Exception types raised across the package."""


class QaeError(Exception):
    """Base class for package errors."""


class ParseError(QaeError):
    """Malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ConflictError(QaeError):
    """Two entries for the same symmetry-equivalent integral disagree."""


class CapacityError(QaeError):
    """Requested problem exceeds a configured size cap."""


class DomainError(QaeError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConfigError(QaeError, ValueError):
    """Inconsistent or invalid configuration."""


class DegenerateError(QaeError, ArithmeticError):
    """Coefficient vector is identically zero."""


class NoSolutionError(QaeError):
    """Every lambda point of a scan decoded to the zero vector."""
