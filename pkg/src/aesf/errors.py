"""Semantic exceptions shared across the package.

The CLI maps these onto stable exit codes (see ``aesf.cli``), so library
code should raise these rather than bare ``ValueError`` for contract
violations a caller may want to distinguish.
"""


class AesfError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(AesfError, ValueError):
    """An argument is outside the documented domain (NaN, empty data, ...)."""


class TieError(AesfError, ValueError):
    """Tied values where a rank-based statistic requires none."""

    def __init__(self, message: str, rows: tuple[int, ...] = ()):
        super().__init__(message)
        self.rows = tuple(rows)


class UnsupportedError(AesfError, ValueError):
    """A (functional, model) combination outside the supported table."""


class ParseError(AesfError, ValueError):
    """Malformed CSV or JSON input."""


class NumericsError(AesfError, FloatingPointError):
    """Internal numerical invariant violated (e.g. probability clamp too large)."""
