"""Additive-noise local differential privacy.

Each record's feature vector is released as ``x + w`` where ``w`` has
i.i.d. Laplace or Gaussian coordinates. Outputs are released unchanged.
Noise is calibrated to the l1-sensitivity of the identity query on the box
``[lower, upper]^p_x``, which is ``(upper - lower) * p_x``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FeatureBounds
from .exceptions import CalibrationError, ProvenanceError

__all__ = [
    "MechanismKind", "PrivacyBudget", "MechanismParams", "sensitivity",
    "calibrate", "privatize", "sample_noise", "gaussian_sigma",
]


class MechanismKind(str, enum.Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PrivacyBudget:
    """``(epsilon, delta)``; ``delta = 0`` means pure DP."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise CalibrationError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise CalibrationError(f"delta must lie in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class MechanismParams:
    kind: MechanismKind
    sensitivity: float
    scale: float
    budget: PrivacyBudget

    @property
    def noise_variance(self) -> float:
        """Per-coordinate variance: ``2 b**2`` (Laplace) or ``sigma**2``."""
        if self.kind is MechanismKind.LAPLACE:
            return 2.0 * self.scale ** 2
        return self.scale ** 2


def sensitivity(bounds: FeatureBounds, p_x: int) -> float:
    """l1-sensitivity ``(upper - lower) * p_x`` of releasing a feature vector."""
    if not isinstance(bounds, FeatureBounds):
        bounds = FeatureBounds(*bounds)
    if int(p_x) != p_x or p_x < 1:
        raise CalibrationError(f"p_x must be a positive integer, got {p_x}")
    return bounds.width * int(p_x)


def gaussian_sigma(sens: float, budget: PrivacyBudget) -> float:
    """Standard deviation ``sqrt(2 ln(1.25/delta)) * sens / epsilon``."""
    if budget.delta <= 0:
        raise CalibrationError("the Gaussian mechanism needs delta > 0")
    return math.sqrt(2.0 * math.log(1.25 / budget.delta)) * sens / budget.epsilon


def calibrate(kind, bounds: FeatureBounds, p_x: int,
              budget: PrivacyBudget) -> MechanismParams:
    """Noise parameters making the additive mechanism ``(eps, delta)``-LDP.

    Examples
    --------
    >>> calibrate("laplace", FeatureBounds(0, 1), 4, PrivacyBudget(2.0)).scale
    2.0
    """
    kind = MechanismKind(kind)
    sens = sensitivity(bounds, p_x)
    if kind is MechanismKind.LAPLACE:
        scale = sens / budget.epsilon
    else:
        scale = gaussian_sigma(sens, budget)
    return MechanismParams(kind, sens, scale, budget)


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # 53-bit grid shifted by half a step: never 0 or 1, so the log below is finite
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / float(1 << 53)


def sample_noise(params: MechanismParams, size, seed) -> np.ndarray:
    """I.i.d. zero-mean noise with the calibrated distribution."""
    rng = np.random.default_rng(seed)
    if params.kind is MechanismKind.LAPLACE:
        v = _open_uniform(rng, size) - 0.5
        return -params.scale * np.sign(v) * np.log1p(-2.0 * np.abs(v))
    return params.scale * rng.standard_normal(size)


def privatize(data: Dataset, params: MechanismParams, seed) -> Dataset:
    """Release ``features + noise``; outputs are copied bit-for-bit.

    Perturbed features are not clamped back into ``data.bounds``.
    """
    if data.is_private:
        raise ProvenanceError("dataset is already privatized")
    noise = sample_noise(params, data.features.shape, seed)
    return Dataset(data.features + noise, data.outputs.copy(), data.bounds, params,
                   data.feature_names, data.output_names)
