"""Exception types shared across the package.

The CLI maps each category to a distinct exit code, so library code should
raise these rather than bare builtins wherever the failure category matters.
"""


class PixelGanError(Exception):
    """Base class for all library errors."""


class ArgumentError(PixelGanError, ValueError):
    """Bad argument values or shapes supplied by the caller."""


class ConfigError(ArgumentError):
    """Invalid configuration (non-chaining layers, empty grids, ...)."""


class DataError(PixelGanError, ValueError):
    """Input data violates a contract (unknown label, constant band, NaN, ...)."""


class ParseError(DataError):
    """File content could not be parsed; carries the offending 1-based row."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NumericError(PixelGanError, ArithmeticError):
    """Non-finite values encountered during numeric computation."""


class StateError(PixelGanError, RuntimeError):
    """Operation invoked on an object in the wrong state."""
