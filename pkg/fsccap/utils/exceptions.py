"""
Errors raised by fsccap.

All errors derive from `FscError`, which is a `ValueError` so callers that only
guard against bad input keep working. Payloads are kept as attributes.
"""


class FscError(ValueError):
    """Base error of the package."""


class ShapeError(FscError):
    """A tensor does not have its declared shape."""


class ShapeMismatchError(ShapeError):
    """Two objects that must share alphabets or dimensions do not."""


class RowSumError(FscError):
    """
    A conditional-probability row does not sum to one.

    Parameters
    ----------
    row : tuple
        identifier of the row, e.g. ("p", x, s_prev)
    actual : Rat
        the exact sum that was found

    """

    def __init__(self, row, actual):
        self.row = row
        self.actual = actual
        super().__init__(f"row {row} sums to {actual} instead of 1")


class NegativeEntryError(FscError):
    """A probability entry is negative."""

    def __init__(self, where, value):
        self.where = where
        self.value = value
        super().__init__(f"entry {where} is negative ({value})")


class ParamRangeError(FscError):
    """A parameter is outside of its admissible range."""


class NotADistributionError(FscError):
    """A vector is not a probability distribution."""


class RationalParseError(FscError):
    """A value could not be parsed as an exact rational."""


class BudgetError(FscError):
    """An enumeration or block size exceeds the configured cap."""


class MonotonicityViolationError(FscError):
    """A sequence that must be monotone regressed."""


class NonconvergenceError(FscError):
    """
    An iterative solver exhausted its iteration budget.

    Parameters
    ----------
    budget : int
        the iteration budget that was exhausted
    result : object
        the best certified result found so far

    """

    def __init__(self, budget, result=None):
        self.budget = budget
        self.result = result
        super().__init__(f"solver did not converge within {budget} iterations")
