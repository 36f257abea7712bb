"""Error types shared across the package.

Every error raised for bad user input derives from :class:`ValidationError`
(a ``ValueError``), and every failure of a numerical routine derives from
:class:`NumericalError`.  The CLI maps the two families to distinct exit codes.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid argument or configuration."""

    def __init__(self, message: str, fields: list[str] | None = None):
        super().__init__(message)
        self.fields = list(fields or [])


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SingularityError(NumericalError, ZeroDivisionError):
    """Evaluation hit a pole of the score kernel (possible only at |theta| = 1)."""


class DegenerateStatisticError(NumericalError):
    """A ratio statistic was requested while its denominator vanishes."""
