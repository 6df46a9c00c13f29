"""Exception hierarchy shared by all fcplab modules."""

from __future__ import annotations


class FcplabError(Exception):
    """Base class for library errors."""


class ValidationError(FcplabError, ValueError):
    """An argument or parameter tuple violates its constraints."""


class DomainError(ValidationError):
    """A special function was called outside its domain."""


class NumericalError(FcplabError, ArithmeticError):
    """Base class for numerical failures (non-convergence, breakdown)."""


class ConvergenceError(NumericalError):
    """A series hit its term budget before the stopping rule fired.

    Attributes
    ----------
    partial_sum : float
        Value of the truncated sum when evaluation stopped.
    last_term : float
        Magnitude of the last term that was added.
    """

    def __init__(self, message: str, partial_sum: float = float("nan"),
                 last_term: float = float("nan")):
        super().__init__(f"{message} (partial_sum={partial_sum:.6g}, "
                         f"last_term={last_term:.3g})")
        self.partial_sum = partial_sum
        self.last_term = last_term


class NegativeProbabilityError(NumericalError):
    """A probability came out negative beyond truncation noise."""


class MomentNonexistenceError(NumericalError):
    """A requested moment of a subordinator does not exist."""


class UnsupportedError(FcplabError, NotImplementedError):
    """The requested operation is not available for this object."""
