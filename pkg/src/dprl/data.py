"""Tabular datasets with bound metadata and privacy provenance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .exceptions import BoundsError, ProvenanceError, ShapeError

if TYPE_CHECKING:
    from .mechanisms import MechanismParams


@dataclass(frozen=True)
class FeatureBounds:
    """Box ``[lower, upper]`` containing every clean feature entry."""

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
            raise BoundsError(f"need finite lower < upper, got [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def max_abs(self) -> float:
        return max(abs(self.lower), abs(self.upper))


UNIT_BOUNDS = FeatureBounds(0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``(n, p_x)`` and output matrix ``(n, p_y)``.

    ``provenance`` is ``None`` for clean data and holds the
    :class:`~dprl.mechanisms.MechanismParams` used when the features were
    privatized. Clean datasets must lie inside ``bounds``; privatized ones
    usually do not.
    """

    features: np.ndarray
    outputs: np.ndarray
    bounds: FeatureBounds = UNIT_BOUNDS
    provenance: Optional["MechanismParams"] = None
    feature_names: Sequence[str] = field(default=())
    output_names: Sequence[str] = field(default=())

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        Y = np.array(self.outputs, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2:
            raise ShapeError("features and outputs must be 2-D")
        if X.shape[0] != Y.shape[0]:
            raise ShapeError(
                f"{X.shape[0]} feature rows but {Y.shape[0]} output rows")
        if X.shape[0] < 1 or X.shape[1] < 1 or Y.shape[1] < 1:
            raise ShapeError(f"empty dataset: features {X.shape}, outputs {Y.shape}")
        if self.provenance is None:
            if X.min() < self.bounds.lower or X.max() > self.bounds.upper:
                raise BoundsError(
                    f"clean features leave [{self.bounds.lower}, {self.bounds.upper}]")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "outputs", Y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "output_names", tuple(self.output_names))

    @classmethod
    def from_arrays(cls, features, outputs, bounds: Optional[FeatureBounds] = None,
                    **kwargs) -> "Dataset":
        """Build a clean dataset, inferring ``bounds`` from the data if omitted."""
        if bounds is None:
            X = np.asarray(features, dtype=float)
            lo, hi = float(X.min()), float(X.max())
            bounds = FeatureBounds(lo, hi if hi > lo else lo + 1.0)
        return cls(features, outputs, bounds, **kwargs)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p_x(self) -> int:
        return self.features.shape[1]

    @property
    def p_y(self) -> int:
        return self.outputs.shape[1]

    @property
    def is_private(self) -> bool:
        return self.provenance is not None

    def require_clean(self, what: str = "operation") -> None:
        if self.is_private:
            raise ProvenanceError(f"{what} requires clean data")

    def take(self, index) -> "Dataset":
        """Row subset with the same bounds and provenance."""
        index = np.asarray(index)
        return Dataset(self.features[index], self.outputs[index], self.bounds,
                       self.provenance, self.feature_names, self.output_names)
