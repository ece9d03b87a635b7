"""
How large is the ambiguity ball?
================================

The radius adds the root-mean-square size of the privacy noise to a
sampling term. With many records the sampling term is taken as zero.
"""

import numpy as np

from dprl import ConcentrationConfig, PrivacyBudget, radius
from dprl.ambiguity import w1_empirical

# two features, one output, unit box: sensitivity 2, p = 3
for eps in (1.0, 10.0, 100.0):
    g = radius("gaussian", PrivacyBudget(eps, 1e-2), 3, 2.0)
    lap = radius("laplace", PrivacyBudget(eps), 3, 2.0)
    print(f"eps={eps:6g}  gaussian rho={g.rho:.5f}  laplace rho={lap.rho:.5f}")

# a finite-sample radius with explicit concentration constants
cfg = ConcentrationConfig(c1=1.0, c2=1.0, a=2.0, big_data=False)
for n in (50, 500, 5000):
    r = radius("gaussian", PrivacyBudget(10.0, 1e-2), 3, 2.0, beta=0.05, n=n, config=cfg)
    print(f"n={n:5d}  zeta={r.zeta_part:.4f}  privacy={r.privacy_part:.4f}")

# the privacy term bounds how far the noisy sample moves in W1
rng = np.random.default_rng(2)
clean = rng.uniform(size=(500, 3))
w = rng.normal(scale=0.2, size=(500, 3))
print(f"W1(clean, noisy) = {w1_empirical(clean, clean + w):.4f}  "
      f"<= sqrt(E||w||^2) = {np.sqrt(3 * 0.04):.4f}")
