"""Exception types shared across the package."""


class FtppError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FtppError, ValueError):
    """An argument violates a mathematical precondition (e.g. time ordering)."""


class ConfigError(FtppError, ValueError):
    """Inconsistent configuration: shape mismatches, bad hyperparameters, bad flags."""


class DataFormatError(FtppError, ValueError):
    """A file could not be parsed or fails schema checks.

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericError(FtppError, ArithmeticError):
    """A numeric computation produced a non-finite value or stagnated."""
