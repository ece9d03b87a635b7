"""Exact distributionally-robust linear regression for Gaussian data.

The joint vector ``z = [x; y]`` of the privatized data is summarized by its
sample mean and unbiased covariance ``(mu, Sigma)``. For a model
``y ~ A x + B`` write ``M = [A, -I]`` so the residual is ``M z + B``. The
worst case of ``E||M z + B||^2`` over Gaussians with mean ``mu`` and
covariance within 2-Wasserstein distance ``rho`` of ``Sigma`` is

    ||M mu + B||^2 + f(A),
    f(A) = inf_{xi > lambda_max(M^T M)}
           xi (rho^2 - tr Sigma) + xi^2 tr((xi I - M^T M)^{-1} Sigma).

``f`` minus the nominal variance ``tr(M Sigma M^T)`` is the regularizer
``lambda(A)``. Training minimizes ``f`` over ``A`` with ``B`` in closed form.
The equivalent semidefinite program is exposed as a certificate checker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple, Union

import numpy as np

from ._descent import SolverConfig, minimize
from .ambiguity import sqrtm_psd
from .data import Dataset
from .exceptions import DomainError, InsufficientDataError, ShapeError

__all__ = [
    "GaussianSummary", "LinearModel", "DualPoint", "SdpCertificate", "InnerDual",
    "summarize", "residual_map", "inner_dual", "lambda_reg", "optimal_bias",
    "gauss_objective", "envelope_gradient", "least_squares", "train_gauss_dro",
    "certificate_from_model", "check_sdp_certificate",
]

SYM_TOL = 1e-12
PSD_TOL = 1e-10
LMI_TOL = 1e-8
FLOOR_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class GaussianSummary:
    """Mean and unbiased covariance of the stacked ``[x; y]`` records."""

    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    p_x: int
    p_y: int

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu_hat, dtype=float))
        S = np.atleast_2d(np.asarray(self.sigma_hat, dtype=float))
        p = self.p_x + self.p_y
        if self.p_x < 1 or self.p_y < 1:
            raise ShapeError("p_x and p_y must be positive")
        if mu.shape != (p,) or S.shape != (p, p):
            raise ShapeError(f"expected mean ({p},) and covariance ({p}, {p}), "
                             f"got {mu.shape} and {S.shape}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(S))):
            raise DomainError("summary has non-finite entries")
        scale = max(1.0, float(np.abs(S).max()))
        if np.abs(S - S.T).max() > SYM_TOL * scale:
            raise DomainError("covariance is not symmetric")
        S = 0.5 * (S + S.T)
        w, V = np.linalg.eigh(S)
        if w.min() < -PSD_TOL * scale:
            raise DomainError(f"covariance is not PSD (min eigenvalue {w.min():.3e})")
        if w.min() < 0:
            S = (V * np.clip(w, 0.0, None)) @ V.T
        object.__setattr__(self, "mu_hat", mu)
        object.__setattr__(self, "sigma_hat", S)

    @property
    def p(self) -> int:
        return self.p_x + self.p_y

    @property
    def mu_x(self) -> np.ndarray:
        return self.mu_hat[:self.p_x]

    @property
    def mu_y(self) -> np.ndarray:
        return self.mu_hat[self.p_x:]


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``y = A x + B`` with ``A`` of shape ``(p_y, p_x)``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_1d(np.asarray(self.B, dtype=float))
        if B.shape != (A.shape[0],):
            raise ShapeError(f"B must have shape ({A.shape[0]},), got {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DomainError("model has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def predict(self, features) -> np.ndarray:
        X = np.atleast_2d(np.asarray(features, dtype=float))
        return X @ self.A.T + self.B

    def to_theta(self) -> np.ndarray:
        """Stacked ``(p_x + 1, p_y)`` parameters as used by :mod:`dprl.erm`."""
        return np.vstack([self.A.T, self.B[None, :]])


@dataclass(frozen=True)
class DualPoint:
    xi: float
    feasible_floor: float

    def __post_init__(self):
        if not self.xi > self.feasible_floor:
            raise DomainError(f"xi={self.xi} must exceed lambda_max(M^T M)={self.feasible_floor}")


@dataclass(frozen=True, eq=False)
class SdpCertificate:
    A: np.ndarray
    B: np.ndarray
    xi: float
    Z: np.ndarray


class InnerDual(NamedTuple):
    f_value: float
    xi_star: float


def summarize(data: Dataset) -> GaussianSummary:
    """Sample mean and ``1/(n-1)`` covariance of ``[features, outputs]``."""
    if data.n < 2:
        raise InsufficientDataError(f"need at least 2 records, got {data.n}")
    Zs = np.hstack([data.features, data.outputs])
    mu = Zs.mean(axis=0)
    S = np.atleast_2d(np.cov(Zs, rowvar=False, ddof=1))
    return GaussianSummary(mu, 0.5 * (S + S.T), data.p_x, data.p_y)


def _check_A(A, summary: GaussianSummary) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.size != summary.p_x * summary.p_y:
        raise ShapeError(f"A must have {summary.p_y}x{summary.p_x} entries")
    A = A.reshape(summary.p_y, summary.p_x)
    if not np.all(np.isfinite(A)):
        raise DomainError("A has non-finite entries")
    return A


def residual_map(A) -> np.ndarray:
    """``M = [A, -I]`` so that ``M [x; y] = A x - y``."""
    A = np.atleast_2d(A)
    return np.hstack([A, -np.eye(A.shape[0])])


class _Spectrum(NamedTuple):
    d: np.ndarray      # eigenvalues of M^T M, ascending
    V: np.ndarray
    St: np.ndarray     # V^T Sigma V
    s: np.ndarray      # diag(St)


def _spectrum(M, Sigma) -> _Spectrum:
    d, V = np.linalg.eigh(M.T @ M)
    d = np.clip(d, 0.0, None)
    St = V.T @ Sigma @ V
    return _Spectrum(d, V, St, np.clip(np.diag(St), 0.0, None))


def _solve_xi(sp: _Spectrum, rho: float) -> float:
    """Minimizer of the scalar dual over ``xi > d_max``.

    In the eigenbasis of ``M^T M`` the dual reads
    ``rho^2 xi + sum s_k d_k + sum c_k / (xi - d_k)`` with ``c_k = s_k d_k^2``,
    so its derivative ``rho^2 - sum c_k / (xi - d_k)^2`` is increasing and
    concave in ``xi``. Newton steps from the left of the root stay left of
    it; a bisection bracket guards against round-off.
    """
    d_max = float(sp.d[-1])
    c = sp.s * sp.d ** 2
    gap = d_max - sp.d
    rho2 = rho * rho

    def deriv(t):
        return rho2 - float(np.sum(c / (t + gap) ** 2))

    t_floor = FLOOR_MARGIN * d_max
    if deriv(t_floor) >= 0.0:
        return d_max + t_floor
    lo = max(t_floor, math.sqrt(c[-1]) / rho)
    hi = max(lo, math.sqrt(float(c.sum())) / rho)
    t = lo
    for _ in range(200):
        g = deriv(t)
        if g >= 0.0:
            hi = t
        else:
            lo = t
        if hi - lo <= 1e-15 * (d_max + hi):
            break
        slope = 2.0 * float(np.sum(c / (t + gap) ** 3))
        t_new = t - g / slope if slope > 0 else hi
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-15 * (d_max + t):
            t = t_new
            break
        t = t_new
    return d_max + t


def _dual_value(sp: _Spectrum, rho: float, xi: float) -> float:
    diff = xi - sp.d
    return rho * rho * xi + float(sp.s @ sp.d) + float(np.sum(sp.s * sp.d ** 2 / diff))


def inner_dual(A, summary: GaussianSummary, rho: float) -> InnerDual:
    """Value and minimizer of the scalar dual problem defining ``f(A)``.

    For ``rho = 0`` the infimum is the nominal residual variance
    ``tr(M Sigma M^T)``, approached as ``xi -> inf``; ``xi_star`` is then
    ``inf``.

    Examples
    --------
    >>> s = GaussianSummary(np.zeros(2), np.eye(2), 1, 1)
    >>> v = inner_dual([[0.0]], s, 1.0)
    >>> round(v.f_value, 9), round(v.xi_star, 6)
    (4.0, 2.0)
    """
    A = _check_A(A, summary)
    if rho < 0 or not math.isfinite(rho):
        raise DomainError(f"rho must be finite and nonnegative, got {rho}")
    M = residual_map(A)
    if rho == 0:
        return InnerDual(float(np.trace(M @ summary.sigma_hat @ M.T)), math.inf)
    sp = _spectrum(M, summary.sigma_hat)
    xi = _solve_xi(sp, rho)
    return InnerDual(_dual_value(sp, rho, xi), xi)


def lambda_reg(A, summary: GaussianSummary, rho: float) -> float:
    """Optimal regularizer ``f(A) - tr(M Sigma M^T)``; exactly 0 at ``rho = 0``."""
    A = _check_A(A, summary)
    if rho < 0 or not math.isfinite(rho):
        raise DomainError(f"rho must be finite and nonnegative, got {rho}")
    if rho == 0:
        return 0.0
    sp = _spectrum(residual_map(A), summary.sigma_hat)
    xi = _solve_xi(sp, rho)
    # same quantity as f - tr(M Sigma M^T), without the cancellation
    return rho * rho * xi + float(np.sum(sp.s * sp.d ** 2 / (xi - sp.d)))


def optimal_bias(A, summary: GaussianSummary) -> np.ndarray:
    """``B = mu_y - A mu_x``, the minimizer of ``||M mu + B||^2``."""
    A = _check_A(A, summary)
    return summary.mu_y - A @ summary.mu_x


def gauss_objective(A, B, summary: GaussianSummary, rho: float) -> float:
    """Robust objective: nominal expected loss under ``N(mu, Sigma)`` plus ``lambda(A)``."""
    A = _check_A(A, summary)
    B = np.atleast_1d(np.asarray(B, dtype=float))
    M = residual_map(A)
    r = M @ summary.mu_hat + B
    return float(r @ r) + inner_dual(A, summary, rho).f_value


def envelope_gradient(A, summary: GaussianSummary, rho: float) -> np.ndarray:
    """Gradient of ``f`` in ``A``, differentiating at the fixed optimal ``xi``.

    ``d f / d M = 2 xi^2 M G Sigma G`` with ``G = (xi I - M^T M)^{-1}``; the
    gradient in ``A`` is its first ``p_x`` columns. For ``rho = 0`` this is
    the gradient of ``tr(M Sigma M^T)``.
    """
    A = _check_A(A, summary)
    M = residual_map(A)
    if rho == 0:
        return 2.0 * (M @ summary.sigma_hat)[:, :summary.p_x]
    sp = _spectrum(M, summary.sigma_hat)
    xi = _solve_xi(sp, rho)
    inv = 1.0 / (xi - sp.d)
    GSG = (sp.V * inv) @ sp.St @ (sp.V * inv).T
    return (2.0 * xi * xi * (M @ GSG))[:, :summary.p_x]


def least_squares(summary: GaussianSummary) -> LinearModel:
    """Population least-squares fit under ``N(mu, Sigma)``."""
    px = summary.p_x
    Sxx = summary.sigma_hat[:px, :px]
    Syx = summary.sigma_hat[px:, :px]
    A = np.linalg.lstsq(Sxx, Syx.T, rcond=None)[0].T
    return LinearModel(A, summary.mu_y - A @ summary.mu_x)


def train_gauss_dro(data: Union[Dataset, GaussianSummary], rho: float,
                    cfg: SolverConfig = SolverConfig()) -> Tuple[LinearModel, float]:
    """Minimize the robust objective over ``(A, B)``.

    Starts from least squares and descends in ``A`` using
    :func:`envelope_gradient` with backtracking; ``B`` is set by
    :func:`optimal_bias` throughout. Returns the model and its objective.
    """
    summary = data if isinstance(data, GaussianSummary) else summarize(data)
    if rho < 0 or not math.isfinite(rho):
        raise DomainError(f"rho must be finite and nonnegative, got {rho}")
    shape = (summary.p_y, summary.p_x)
    A0 = least_squares(summary).A

    def fun(a):
        return inner_dual(a.reshape(shape), summary, rho).f_value

    def grad(a):
        return envelope_gradient(a.reshape(shape), summary, rho).ravel()

    res = minimize(fun, grad, A0.ravel(), cfg, smooth=True, what="train_gauss_dro")
    A = res.x.reshape(shape)
    B = optimal_bias(A, summary)
    return LinearModel(A, B), gauss_objective(A, B, summary, rho)


def certificate_from_model(model: LinearModel, summary: GaussianSummary,
                           rho: float) -> SdpCertificate:
    """Tight SDP certificate ``Z = xi^2 S^1/2 (xi I - M^T M)^{-1} S^1/2`` at ``xi*``."""
    if not rho > 0:
        raise DomainError("a finite certificate needs rho > 0")
    A = _check_A(model.A, summary)
    M = residual_map(A)
    xi = inner_dual(A, summary, rho).xi_star
    R = sqrtm_psd(summary.sigma_hat)
    G = np.linalg.inv(xi * np.eye(summary.p) - M.T @ M)
    Z = xi * xi * R @ G @ R
    return SdpCertificate(A, model.B.copy(), xi, 0.5 * (Z + Z.T))


def lmi_matrix(cert: SdpCertificate, summary: GaussianSummary) -> np.ndarray:
    """The block matrix ``[[Z, xi S^1/2, 0], [xi S^1/2, xi I, M^T], [0, M, I]]``."""
    p, py = summary.p, summary.p_y
    A = _check_A(cert.A, summary)
    Z = np.atleast_2d(np.asarray(cert.Z, dtype=float))
    if Z.shape != (p, p):
        raise ShapeError(f"Z must be {p}x{p}, got {Z.shape}")
    M = residual_map(A)
    R = sqrtm_psd(summary.sigma_hat)
    xi = float(cert.xi)
    return np.block([
        [Z, xi * R, np.zeros((p, py))],
        [xi * R, xi * np.eye(p), M.T],
        [np.zeros((py, p)), M, np.eye(py)],
    ])


def check_sdp_certificate(cert: SdpCertificate, summary: GaussianSummary,
                          rho: float, tol: float = LMI_TOL) -> Tuple[bool, float]:
    """Feasibility of the LMI and the SDP objective at ``cert``.

    The objective is ``xi (rho^2 - tr Sigma) + tr Z + ||M mu + B||^2``.
    """
    L = lmi_matrix(cert, summary)
    B = np.atleast_1d(np.asarray(cert.B, dtype=float))
    if B.shape != (summary.p_y,):
        raise ShapeError(f"B must have shape ({summary.p_y},), got {B.shape}")
    L = 0.5 * (L + L.T)
    feasible = bool(np.linalg.eigvalsh(L)[0] >= -tol)
    M = residual_map(_check_A(cert.A, summary))
    r = M @ summary.mu_hat + B
    obj = (cert.xi * (rho * rho - np.trace(summary.sigma_hat))
           + np.trace(cert.Z) + float(r @ r))
    return feasible, float(obj)
