"""
Exact robust regression for Gaussian data
=========================================

Fit ``y = A x + B`` against the worst Gaussian within a 2-Wasserstein ball
around the sample mean and covariance, then check the answer with an
independent semidefinite certificate.
"""

import numpy as np

from dprl import (Dataset, FeatureBounds, GaussianSummary, check_sdp_certificate, inner_dual,
                  summarize, train_gauss_dro)
from dprl.gauss_dro import certificate_from_model, lambda_reg, least_squares

# the textbook case: A = 0 and unit covariance; the worst case inflates var(y) to 4
unit = GaussianSummary(np.zeros(2), np.eye(2), p_x=1, p_y=1)
v = inner_dual([[0.0]], unit, 1.0)
lam = lambda_reg([[0.0]], unit, 1.0)
print(f"f(0) = {v.f_value:.6f} at xi* = {v.xi_star:.6f}, lambda = {lam:.6f}")

rng = np.random.default_rng(4)
X = rng.uniform(size=(60, 3))
Y = X @ rng.normal(size=(3, 2)) + 0.1 * rng.standard_normal((60, 2))
summary = summarize(Dataset(X, Y, FeatureBounds(0, 1)))

ls = least_squares(summary)
for rho in (0.0, 0.05, 0.2, 0.5):
    model, obj = train_gauss_dro(summary, rho)
    shrink = np.linalg.norm(model.A) / np.linalg.norm(ls.A)
    line = f"rho={rho:4g}  objective {obj:.5f}  |A|/|A_ls| {shrink:.3f}"
    if rho > 0:
        ok, sdp = check_sdp_certificate(certificate_from_model(model, summary, rho), summary, rho)
        line += f"  certificate feasible={ok} value {sdp:.5f}"
    print(line)
