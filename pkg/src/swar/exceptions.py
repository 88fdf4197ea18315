"""Exception and warning classes raised by the package.

Errors fall in three families, which the command line maps to exit codes:

* :class:`DataError` -- malformed or inconsistent input (exit code 2)
* :class:`NumericalInfeasibility` -- the data are valid but the requested
  fit cannot be computed, e.g. a slice with too few observations (exit 3)
* everything else derived from :class:`SwarError` is a usage/config error.
"""


class SwarError(Exception):
    """Base class for all package errors."""


class DataError(SwarError, ValueError):
    """Invalid input data."""


class NumericalInfeasibility(SwarError, ArithmeticError):
    """A fit is not computable for the given data and settings."""


class DimensionMismatch(DataError):
    pass


class NonFinite(DataError):
    pass


class NotSymmetric(DataError):
    pass


class NotOrthonormal(DataError):
    pass


class InvalidWeights(DataError):
    pass


class InvalidParameters(SwarError, ValueError):
    pass


class InvalidSliceCount(InvalidParameters):
    pass


class InvalidDimension(InvalidParameters):
    pass


class InvalidConfig(InvalidParameters):
    pass


class InsufficientData(NumericalInfeasibility):
    pass


class SingularCovariance(NumericalInfeasibility):
    pass


class DegenerateProjection(NumericalInfeasibility):
    pass


class DegenerateEigenvalue(NumericalInfeasibility):
    pass


class SliceTooSmall(NumericalInfeasibility):
    """A slice holds too few observations to estimate its slope."""

    def __init__(self, slice_index, size, required):
        self.slice_index = slice_index
        self.size = size
        self.required = required
        super().__init__(
            f"slice {slice_index + 1} (1-based) has {size} observations, need more than {required}"
        )


class LeaveOneOutInfeasible(NumericalInfeasibility):
    pass


class NoFeasiblePair(NumericalInfeasibility):
    pass


class AllRepsInfeasible(NumericalInfeasibility):
    pass


class OutOfRange(SwarError, ValueError):
    pass


class MissingResidualMoments(SwarError, ValueError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        super().__init__(message)


class NonNumericCell(ParseError):
    pass


class MissingResponse(DataError):
    pass


class RankDeficientWarning(UserWarning):
    """More directions were requested than the estimator can identify."""


class DegenerateSliceWarning(UserWarning):
    """Within-slice influence vanished; equal slice weights were used."""


class ZeroMeanInfluenceWarning(UserWarning):
    """A slice mean influence was floored before taking its reciprocal."""
