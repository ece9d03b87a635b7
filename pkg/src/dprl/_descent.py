"""First-order minimizers shared by the trainers.

Two families:

* a monotone accelerated gradient method with backtracking for objectives
  that are differentiable (almost everywhere, in practice),
* plain subgradient steps with a constant or ``eta0 / sqrt(t)`` rule for
  nonsmooth objectives, returning the best iterate seen.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .exceptions import ConvergenceWarning, DomainError

STEP_RULES = ("auto", "accelerated", "constant", "diminishing")


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget and step rule for the trainers.

    ``step_rule`` is one of ``"auto"`` (accelerated for smooth objectives,
    diminishing otherwise), ``"accelerated"``, ``"constant"`` (step ``step``)
    or ``"diminishing"`` (normalized steps of length ``step / sqrt(t)``).
    ``seed`` only matters for ``init="random"``; the default start is zero.
    """

    max_iters: int = 20000
    step_rule: str = "auto"
    step: Optional[float] = None
    tol: float = 1e-9
    seed: int = 0
    init: str = "zeros"

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.step_rule not in STEP_RULES:
            raise DomainError(f"unknown step rule {self.step_rule!r}")
        if self.step is not None and not self.step > 0:
            raise DomainError("step must be positive")
        if self.init not in ("zeros", "random"):
            raise DomainError(f"unknown init {self.init!r}")

    def initial_point(self, shape) -> np.ndarray:
        if self.init == "zeros":
            return np.zeros(shape)
        return 0.01 * np.random.default_rng(self.seed).standard_normal(shape)


@dataclass
class DescentResult:
    x: np.ndarray
    fun: float
    n_iter: int
    converged: bool
    history: List[float] = field(default_factory=list)


def _norm(v) -> float:
    return float(np.sqrt(np.sum(v * v)))


def accelerated_descent(fun: Callable, grad: Callable, x0, max_iters: int, tol: float,
                        step: Optional[float] = None) -> DescentResult:
    """Monotone FISTA-style descent with backtracking on the step size.

    The returned iterate never has a larger objective than any earlier
    accepted one; ``history`` records those accepted objective values.
    Stops once ``||grad|| <= tol * max(1, ||grad(x0)||)`` or when the
    objective stops changing in floating point.
    """
    x = np.array(x0, dtype=float)
    fx = fun(x)
    gx = grad(x)
    g_scale = max(1.0, _norm(gx))
    L = 1.0 / step if step else 1.0
    y, t = x.copy(), 1.0
    history = [fx]
    stalls = 0
    for k in range(1, max_iters + 1):
        if _norm(gx) <= tol * g_scale:
            return DescentResult(x, fx, k - 1, True, history)
        fy, gy = (fx, gx) if y is x else (fun(y), grad(y))
        gy2 = float(np.sum(gy * gy))
        while True:
            z = y - gy / L
            fz = fun(z)
            if fz <= fy - 0.5 * gy2 / L + 1e-15 * abs(fy) or L > 1e30:
                break
            L *= 2.0
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if fz <= fx:
            x_prev, x = x, z
            change = fx - fz
            fx = fz
            gx = grad(x)
            y = x + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
        else:
            # no improvement from the extrapolated point: restart momentum
            change = 0.0
            y, t = x, 1.0
        history.append(fx)
        stalls = stalls + 1 if change <= 1e-15 * max(1.0, abs(fx)) else 0
        if stalls >= 25:
            return DescentResult(x, fx, k, True, history)
        L *= 0.9
    return DescentResult(x, fx, max_iters, _norm(gx) <= tol * g_scale, history)


def subgradient_descent(fun: Callable, subgrad: Callable, x0, max_iters: int, tol: float,
                        rule: str = "diminishing", step: Optional[float] = None,
                        window: int = 200, shrink: float = 0.25) -> DescentResult:
    """Restarted subgradient method returning the best iterate.

    Each stage takes normalized steps of length ``eta / sqrt(t)``
    (``"diminishing"``) or ``eta`` (``"constant"``) from the best point so
    far. A stage ends when the running best improves by less than
    ``tol * (1 + |best|)`` over ``window`` iterations; the next stage starts
    from the best point with ``eta`` scaled by ``shrink``. Converged once a
    step of the current length cannot change the objective by more than
    that amount, or a zero subgradient is hit. ``history`` holds the running
    best objective, which is nonincreasing.
    """
    eta = 1.0 if step is None else float(step)
    x = np.array(x0, dtype=float)
    best_x, best_f = x.copy(), fun(x)
    history = [best_f]
    t = 0
    for k in range(1, max_iters + 1):
        g = subgrad(x)
        gn = _norm(g)
        if gn == 0.0:
            return DescentResult(best_x, best_f, k - 1, True, history)
        t += 1
        length = eta if rule == "constant" else eta / math.sqrt(t)
        x = x - length * g / gn
        fx = fun(x)
        if fx < best_f:
            best_x, best_f = x.copy(), fx
        history.append(best_f)
        slack = tol * (1.0 + abs(best_f))
        if t >= window and history[-window - 1] - best_f <= slack:
            if eta * gn <= slack:
                return DescentResult(best_x, best_f, k, True, history)
            x, t, eta = best_x.copy(), 0, eta * shrink
    return DescentResult(best_x, best_f, max_iters, False, history)


def minimize(fun: Callable, grad: Callable, x0, cfg: SolverConfig, smooth: bool,
             what: str = "solver") -> DescentResult:
    rule = cfg.step_rule
    if rule == "auto":
        rule = "accelerated" if smooth else "diminishing"
    if rule == "accelerated":
        res = accelerated_descent(fun, grad, x0, cfg.max_iters, cfg.tol, cfg.step)
    else:
        res = subgradient_descent(fun, grad, x0, cfg.max_iters, cfg.tol, rule, cfg.step)
    if not res.converged:
        warnings.warn(f"{what} stopped after {res.n_iter} iterations without meeting "
                      f"tol={cfg.tol}; returning best iterate", ConvergenceWarning,
                      stacklevel=3)
    return res
