"""
Exception hierarchy shared by the expander toolkit.
Library code raises these; qexpander.py turns them into exit statuses.
"""

from typing import Optional


class QExpanderError(Exception):
    """Base class for every error raised by the toolkit."""


class DimensionMismatchError(QExpanderError, ValueError):
    """Operands have incompatible shapes."""


class DimensionCapError(QExpanderError):
    """Refusal to materialize an object above a configured size cap."""

    def __init__(self, what: str, requested: int, cap: int, hint: Optional[str] = None):
        self.what = what
        self.requested = requested
        self.cap = cap
        self.hint = hint
        message = f"{what}: dimension {requested} exceeds cap {cap}"
        if hint:
            message += f" ({hint})"
        super().__init__(message)


class NotUnitaryError(QExpanderError, ValueError):
    """A matrix failed the unitarity check."""

    def __init__(self, index: int, deviation: float, tolerance: float):
        self.index = index
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(
            f"matrix {index} is not unitary: ||U^dag U - I||_F = {deviation:.3e} > {tolerance:.3e}"
        )


class RegularityError(QExpanderError, ValueError):
    """A composition precondition on dimension/degree does not hold."""


class EnsembleFormatError(QExpanderError):
    """An ensemble file could not be decoded."""


class SearchBudgetError(QExpanderError):
    """Exhaustive search space is larger than the configured budget."""
