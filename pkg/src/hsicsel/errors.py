"""Exception types and warning categories shared across the package."""


class HsicSelError(Exception):
    """Base class for all errors raised by this package."""


class AllIdenticalError(HsicSelError):
    """Every pairwise distance is zero; the median bandwidth is undefined."""


class NonFiniteError(HsicSelError):
    """Input contains NaN or infinite entries."""


class SizeMismatchError(HsicSelError):
    """Gram matrices or vectors have incompatible shapes."""


class TooFewSamplesError(HsicSelError):
    """Not enough samples for the requested estimator."""


class DuplicateIndexError(HsicSelError):
    """Indices passed to a U-statistic kernel must be distinct."""


class BlockTooSmallError(HsicSelError):
    """Block size below 4 or larger than the usable sample count."""


class NotSymmetricError(HsicSelError):
    """Matrix expected to be symmetric is not."""


class TooFewSummandsError(HsicSelError):
    """Covariance estimation needs at least two summands per feature."""


class NotPDError(HsicSelError):
    """Matrix is not positive definite."""


class DegenerateFoldsError(HsicSelError):
    """Cross-validation folds cannot be formed from the given rows."""


class LambdaZeroError(HsicSelError):
    """Selection events are undefined for a zero regularisation parameter."""


class NotSelectedError(HsicSelError):
    """Feature is not in the active set."""


class DegenerateDirectionError(HsicSelError):
    """Target direction has non-positive variance under the covariance estimate."""


class EmptyIntervalError(HsicSelError):
    """Truncation interval collapsed; the feature is not testable."""


class OutsideTruncationError(HsicSelError):
    """Observed statistic violates the selection polyhedron beyond slack."""


class FoldTooSmallError(HsicSelError):
    """Data split would leave a fold with too few rows."""


class CsvIngestError(HsicSelError):
    """CSV file could not be parsed into a dataset."""


class NumericalDegeneracyWarning(RuntimeWarning):
    """A truncated-Gaussian computation degenerated to a boundary value."""


class RootNotBracketedWarning(RuntimeWarning):
    """Confidence-interval root finding ran out of bracket; endpoint set to infinity."""
