"""
Regression with a Lipschitz regularizer
=======================================

Train on privatized features with ``empirical loss + rho * L(theta)`` and
score on clean data. ``rho = 0`` is ordinary least squares.
"""

import numpy as np

from dprl import (Dataset, FeatureBounds, LossSpec, PrivacyBudget, calibrate, evaluate,
                  privatize, train_regularized)
from dprl.erm import lipschitz_constant

rng = np.random.default_rng(3)
w = np.array([0.5, -0.3, 0.2])


def sample(n):
    X = rng.uniform(size=(n, 3))
    y = np.clip(X @ w + 0.3 + 0.05 * rng.standard_normal(n), 0, 1)
    return Dataset(X, y, FeatureBounds(0, 1))


train, test = sample(50), sample(5000)
params = calibrate("gaussian", train.bounds, 3, PrivacyBudget(3.0, 1e-2))
private = privatize(train, params, seed=0)

# X and Y bounds come from the unit box
spec = LossSpec.from_bounds("quadratic", train.bounds, 3)
print(f"X={spec.X_bound:.3f} Y={spec.Y_bound:.3f}")

for rho in (0.0, 1e-3, 1e-2, 1e-1, 1.0):
    m = train_regularized(private, spec, rho)
    print(f"rho={rho:6g}  train objective {m.objective:.4f}  "
          f"L(theta) {lipschitz_constant(spec, m.theta):.4f}  "
          f"clean test loss {evaluate(test, spec, m.theta):.4f}")

# the absolute loss is nonsmooth and uses the restarted subgradient method
abs_spec = LossSpec.from_bounds("absolute", train.bounds, 3)
m = train_regularized(private, abs_spec, 0.05)
print(f"absolute loss: {m.n_iter} iterations, objective {m.objective:.5f}")
