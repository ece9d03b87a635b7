"""Lipschitz-regularized empirical risk minimization.

Models are affine in the features, ``theta^T [x; 1]`` (passed through a
sigmoid for the logistic loss). The worst-case risk over a 1-Wasserstein
ball of radius ``rho`` is bounded by ``empirical risk + rho * L(theta)``
where ``L`` is the Lipschitz constant of the loss in ``(x, y)``:

=========  ===============================
loss       L(theta)
=========  ===============================
quadratic  ``(X + 1 + Y) * ||theta||_*^2``
absolute   ``||theta||_*``
logistic   ``(Y + X + 2) * ||theta||_*``
=========  ===============================

Multi-output problems are trained one output column at a time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.special import expit

from ._descent import SolverConfig, minimize
from .data import Dataset, FeatureBounds
from .exceptions import DomainError, LabelError, ShapeError

__all__ = [
    "LossKind", "Norm", "LossSpec", "ThetaModel", "SolverConfig", "dual_norm",
    "dual_norm_subgradient", "lipschitz_constant", "empirical_loss",
    "regularized_objective", "objective_gradient", "train_regularized", "evaluate",
]


class LossKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    ABSOLUTE = "absolute"
    LOGISTIC = "logistic"


class Norm(str, enum.Enum):
    """Norm on the data space; the regularizer uses its dual."""

    L2 = "l2"
    L1 = "l1"
    LINF = "linf"

    @property
    def dual(self) -> "Norm":
        return {Norm.L2: Norm.L2, Norm.L1: Norm.LINF, Norm.LINF: Norm.L1}[self]


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind = LossKind.QUADRATIC
    X_bound: float = 1.0
    Y_bound: float = 1.0
    norm: Norm = Norm.L2

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        object.__setattr__(self, "norm", Norm(self.norm))
        if self.X_bound < 0 or self.Y_bound < 0:
            raise DomainError("X_bound and Y_bound must be nonnegative")

    @classmethod
    def from_bounds(cls, kind, bounds: FeatureBounds, p_x: int, norm=Norm.L2,
                    y_bound: float = 1.0) -> "LossSpec":
        """Spec with ``X = max ||x||`` over the box ``bounds^p_x``."""
        norm = Norm(norm)
        m = bounds.max_abs()
        X = {Norm.L2: np.sqrt(p_x) * m, Norm.L1: p_x * m, Norm.LINF: m}[norm]
        return cls(kind, float(X), float(y_bound), norm)

    @property
    def smooth(self) -> bool:
        # quadratic + squared l2 is C^1; logistic + l2 is smooth away from 0
        return self.norm is Norm.L2 and self.kind is not LossKind.ABSOLUTE


@dataclass
class ThetaModel:
    """Stacked parameters: ``theta[:-1]`` are weights, ``theta[-1]`` the bias.

    ``theta`` has shape ``(p_x + 1, p_y)``; column ``j`` predicts output ``j``.
    """

    theta: np.ndarray
    kind: LossKind = LossKind.QUADRATIC
    objective: float = float("nan")
    converged: bool = True
    n_iter: int = 0
    history: List[float] = field(default_factory=list)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim == 1:
            theta = theta[:, None]
        if not np.all(np.isfinite(theta)):
            raise DomainError("theta has non-finite entries")
        self.theta = theta

    @property
    def weights(self) -> np.ndarray:
        return self.theta[:-1]

    @property
    def bias(self) -> np.ndarray:
        return self.theta[-1]

    def predict(self, features) -> np.ndarray:
        return _predict(_design(features), self.theta, self.kind)


def dual_norm(theta, norm=Norm.L2) -> float:
    """Dual of ``norm`` evaluated at the vector ``theta``."""
    theta = np.ravel(np.asarray(theta, dtype=float))
    d = Norm(norm).dual
    if d is Norm.L2:
        return float(np.sqrt(theta @ theta))
    if d is Norm.L1:
        return float(np.abs(theta).sum())
    return float(np.abs(theta).max(initial=0.0))


def dual_norm_subgradient(theta, norm=Norm.L2) -> np.ndarray:
    """One subgradient of :func:`dual_norm`; zero at the origin.

    For the max-norm, ties go to the lowest index.
    """
    theta = np.asarray(theta, dtype=float)
    d = Norm(norm).dual
    g = np.zeros_like(theta)
    if not np.any(theta):
        return g
    if d is Norm.L2:
        return theta / np.sqrt(theta @ theta)
    if d is Norm.L1:
        return np.sign(theta)
    i = int(np.argmax(np.abs(theta)))
    g[i] = np.sign(theta[i])
    return g


def _lipschitz_column(spec: LossSpec, theta) -> float:
    dn = dual_norm(theta, spec.norm)
    if spec.kind is LossKind.QUADRATIC:
        return (spec.X_bound + 1.0 + spec.Y_bound) * dn ** 2
    if spec.kind is LossKind.ABSOLUTE:
        return dn
    return (spec.Y_bound + spec.X_bound + 2.0) * dn


def lipschitz_constant(spec: LossSpec, theta) -> float:
    """``L(theta)``, summed over output columns for 2-D ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        return _lipschitz_column(spec, theta)
    return float(sum(_lipschitz_column(spec, theta[:, j]) for j in range(theta.shape[1])))


def _design(features) -> np.ndarray:
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _predict(Z, theta, kind) -> np.ndarray:
    s = Z @ theta
    return expit(s) if kind is LossKind.LOGISTIC else s


def _as_columns(theta, p_x: int, p_y: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    if theta.shape != (p_x + 1, p_y):
        raise ShapeError(f"theta must have shape {(p_x + 1, p_y)}, got {theta.shape}")
    return theta


def _check_labels(spec: LossSpec, Y) -> None:
    if spec.kind is LossKind.LOGISTIC and not np.all((Y == 0) | (Y == 1)):
        raise LabelError("logistic loss needs outputs in {0, 1}")


def _column_loss(kind, Z, y, th) -> float:
    s = Z @ th
    if kind is LossKind.QUADRATIC:
        return 0.5 * float(np.mean((s - y) ** 2))
    if kind is LossKind.ABSOLUTE:
        return float(np.mean(np.abs(s - y)))
    # -y log sigmoid(s) - (1-y) log(1 - sigmoid(s)), computed stably
    return float(np.mean(np.logaddexp(0.0, s) - y * s))


def _column_loss_grad(kind, Z, y, th) -> np.ndarray:
    s = Z @ th
    if kind is LossKind.QUADRATIC:
        r = s - y
    elif kind is LossKind.ABSOLUTE:
        r = np.sign(s - y)
    else:
        r = expit(s) - y
    return Z.T @ r / Z.shape[0]


def empirical_loss(data: Dataset, spec: LossSpec, theta) -> float:
    """Mean per-record loss, summed over output columns."""
    th = _as_columns(theta, data.p_x, data.p_y)
    _check_labels(spec, data.outputs)
    Z = _design(data.features)
    return float(sum(_column_loss(spec.kind, Z, data.outputs[:, j], th[:, j])
                     for j in range(data.p_y)))


def evaluate(data: Dataset, spec: LossSpec, theta) -> float:
    """Out-of-sample loss of ``theta`` on a held-out (clean) dataset."""
    return empirical_loss(data, spec, theta)


def regularized_objective(data: Dataset, spec: LossSpec, theta, rho: float) -> float:
    """``empirical_loss + rho * L(theta)``."""
    return empirical_loss(data, spec, theta) + rho * lipschitz_constant(
        spec, _as_columns(theta, data.p_x, data.p_y))


def _column_reg_grad(spec: LossSpec, th) -> np.ndarray:
    g = dual_norm_subgradient(th, spec.norm)
    if spec.kind is LossKind.QUADRATIC:
        return (spec.X_bound + 1.0 + spec.Y_bound) * 2.0 * dual_norm(th, spec.norm) * g
    if spec.kind is LossKind.ABSOLUTE:
        return g
    return (spec.Y_bound + spec.X_bound + 2.0) * g


def objective_gradient(data: Dataset, spec: LossSpec, theta, rho: float) -> np.ndarray:
    """A (sub)gradient of :func:`regularized_objective`, same shape as ``theta``."""
    th = _as_columns(theta, data.p_x, data.p_y)
    Z = _design(data.features)
    G = np.empty_like(th)
    for j in range(data.p_y):
        G[:, j] = (_column_loss_grad(spec.kind, Z, data.outputs[:, j], th[:, j])
                   + rho * _column_reg_grad(spec, th[:, j]))
    return G


def train_regularized(data: Dataset, spec: LossSpec, rho: float = 0.0,
                      cfg: SolverConfig = SolverConfig()) -> ThetaModel:
    """Minimize ``empirical_loss + rho * L(theta)`` over affine models.

    ``rho = 0`` gives plain empirical risk minimization. Each output column
    is an independent problem. Emits
    :class:`~dprl.exceptions.ConvergenceWarning` and returns the best iterate
    when ``cfg.max_iters`` runs out.
    """
    if rho < 0:
        raise DomainError(f"rho must be nonnegative, got {rho}")
    _check_labels(spec, data.outputs)
    Z = _design(data.features)
    kind = spec.kind
    smooth = spec.smooth or (rho == 0 and kind is not LossKind.ABSOLUTE)
    theta = np.empty((data.p_x + 1, data.p_y))
    total, converged, iters, history = 0.0, True, 0, None
    for j in range(data.p_y):
        y = data.outputs[:, j]

        def fun(th, y=y):
            return _column_loss(kind, Z, y, th) + rho * _lipschitz_column(spec, th)

        def grad(th, y=y):
            return _column_loss_grad(kind, Z, y, th) + rho * _column_reg_grad(spec, th)

        res = minimize(fun, grad, cfg.initial_point(data.p_x + 1), cfg, smooth,
                       what="train_regularized")
        theta[:, j] = res.x
        total += res.fun
        converged &= res.converged
        iters = max(iters, res.n_iter)
        history = res.history if history is None else _sum_histories(history, res.history)
    return ThetaModel(theta, kind, total, converged, iters, history)


def _sum_histories(a: List[float], b: List[float]) -> List[float]:
    # pad the shorter one with its final value
    n = max(len(a), len(b))
    a = a + [a[-1]] * (n - len(a))
    b = b + [b[-1]] * (n - len(b))
    return [u + v for u, v in zip(a, b)]
