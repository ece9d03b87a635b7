"""Exception hierarchy for :mod:`dprl`.

Every error raised on bad input derives from :class:`DprlError`, which is
itself a :class:`ValueError`, so callers can catch either.
"""


class DprlError(ValueError):
    """Base class for all dprl input errors."""


class BoundsError(DprlError):
    """Feature bounds are malformed (lower >= upper or non-finite)."""


class CalibrationError(DprlError):
    """A privacy budget cannot calibrate the requested mechanism."""


class ProvenanceError(DprlError):
    """Operation is not allowed for the dataset's provenance."""


class UnsupportedDimensionError(DprlError):
    """The concentration bound is undefined for the given dimension."""


class ShapeError(DprlError):
    """Array shapes are inconsistent."""


class DomainError(DprlError):
    """Input lies outside the mathematical domain of the operation."""


class LabelError(DprlError):
    """Outputs are not valid labels for the requested loss."""


class InsufficientDataError(DprlError):
    """Too few records for the requested statistic."""


class SchemaError(DprlError):
    """A table does not match its schema."""


class EmptyDataError(DprlError):
    """No usable records remain."""


class SplitError(DprlError):
    """A train/test split request is out of range."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at ``max_iters`` before meeting ``tol``."""
