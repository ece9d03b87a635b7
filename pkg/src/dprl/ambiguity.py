"""Wasserstein ambiguity radii and the distances they bound.

The radius of the ball around the privatized empirical distribution has two
parts: a sampling term ``zeta`` from measure concentration and a noise term
``sqrt(E||w||^2)`` from the privacy mechanism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError, ShapeError, UnsupportedDimensionError
from .mechanisms import MechanismKind, PrivacyBudget

__all__ = [
    "ConcentrationConfig", "Radius", "zeta", "privacy_radius", "radius",
    "w1_empirical", "w2_gaussian", "sqrtm_psd",
]

PSD_TOL = 1e-10


@dataclass(frozen=True)
class ConcentrationConfig:
    """Constants of the light-tail concentration bound.

    ``c1`` and ``c2`` are not known numerically for real data; with
    ``big_data=True`` (the default) the sampling term is taken as zero.
    """

    c1: float = 1.0
    c2: float = 1.0
    a: float = 2.0
    big_data: bool = True

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise DomainError("c1 and c2 must be positive")
        if not self.a > 1:
            raise DomainError("light-tail exponent a must exceed 1")


@dataclass(frozen=True)
class Radius:
    rho: float
    zeta_part: float
    privacy_part: float


def zeta(gamma: float, n: int, p: int,
         config: ConcentrationConfig = ConcentrationConfig()) -> float:
    """Sampling part of the radius at confidence ``1 - gamma``.

    ``(log(c1/gamma) / (c2 n)) ** (1/max(p, 2))`` once ``n >= log(c1/gamma)/c2``
    and exponent ``1/a`` below that.
    """
    if config.big_data:
        return 0.0
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if p < 1:
        raise DomainError(f"p must be positive, got {p}")
    if p == 2:
        raise UnsupportedDimensionError("the concentration bound excludes p = 2")
    log_term = math.log(config.c1 / gamma)
    if log_term <= 0.0:
        # c1 <= gamma: the tail bound holds trivially
        return 0.0
    ratio = log_term / (config.c2 * n)
    if n >= log_term / config.c2:
        return ratio ** (1.0 / max(p, 2))
    return ratio ** (1.0 / config.a)


def privacy_radius(kind, budget: PrivacyBudget, p: int, sensitivity: float) -> float:
    """``sqrt(E||w||^2)`` for ``p`` noise coordinates.

    ``sqrt(2p) * sens / eps`` for Laplace and
    ``sqrt(2p ln(1.25/delta)) * sens / eps`` for Gaussian noise.
    """
    kind = MechanismKind(kind)
    if p < 1 or sensitivity <= 0:
        raise DomainError("p and sensitivity must be positive")
    if kind is MechanismKind.LAPLACE:
        return math.sqrt(2.0 * p) * sensitivity / budget.epsilon
    if budget.delta <= 0:
        raise DomainError("the Gaussian radius needs delta > 0")
    return math.sqrt(2.0 * p * math.log(1.25 / budget.delta)) * sensitivity / budget.epsilon


def radius(kind, budget: PrivacyBudget, p: int, sensitivity: float,
           beta: float = 0.05, n: Optional[int] = None,
           config: ConcentrationConfig = ConcentrationConfig()) -> Radius:
    """Ambiguity radius guaranteeing coverage with probability ``1 - beta``."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if config.big_data:
        z = 0.0
    else:
        if n is None:
            raise DomainError("n is required unless big_data is set")
        z = zeta(beta, n, p, config)
    priv = privacy_radius(kind, budget, p, sensitivity)
    return Radius(z + priv, z, priv)


def w1_empirical(P, Q) -> float:
    """Exact 1-Wasserstein distance between two uniform empirical measures.

    Both point clouds must have the same size ``m``; the optimal coupling is
    then a permutation, found by solving the assignment problem on the
    Euclidean cost matrix.
    """
    from scipy.optimize import linear_sum_assignment
    from scipy.spatial.distance import cdist

    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if P.ndim != 2 or P.shape != Q.shape:
        raise ShapeError(f"point sets must share shape, got {P.shape} and {Q.shape}")
    if P.shape[0] == 0:
        raise ShapeError("point sets are empty")
    # tied optimal couplings can differ by an ulp; solving the pair in a fixed
    # order makes the result exactly symmetric
    if P.tobytes() > Q.tobytes():
        P, Q = Q, P
    C = cdist(P, Q)
    rows, cols = linear_sum_assignment(C)
    return math.fsum(C[rows, cols]) / P.shape[0]


def sqrtm_psd(S, tol: float = PSD_TOL) -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition.

    Eigenvalues in ``[-tol, 0)`` are treated as zero; anything more negative
    raises :class:`DomainError`.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {S.shape}")
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    if w.size and w.min() < -tol * max(1.0, abs(w).max()):
        raise DomainError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def w2_gaussian(mu1, Sigma1, mu2, Sigma2) -> float:
    """2-Wasserstein distance between ``N(mu1, Sigma1)`` and ``N(mu2, Sigma2)``.

    ``sqrt(||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2))``.
    """
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    mu2 = np.atleast_1d(np.asarray(mu2, dtype=float))
    S1 = np.atleast_2d(np.asarray(Sigma1, dtype=float))
    S2 = np.atleast_2d(np.asarray(Sigma2, dtype=float))
    d = mu1.shape[0]
    if mu2.shape != (d,) or S1.shape != (d, d) or S2.shape != (d, d):
        raise ShapeError("means and covariances have inconsistent shapes")
    r1 = sqrtm_psd(S1)
    sqrtm_psd(S2)  # validates PSD
    cross = sqrtm_psd(r1 @ S2 @ r1)
    sq = float(np.sum((mu1 - mu2) ** 2) + np.trace(S1) + np.trace(S2) - 2.0 * np.trace(cross))
    return math.sqrt(max(sq, 0.0))
