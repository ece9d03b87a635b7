"""
Privatizing features at the source
==================================

Each record's features get independent noise before anyone collects them.
Outputs are left alone.
"""

import numpy as np

from dprl import Dataset, FeatureBounds, PrivacyBudget, calibrate, privatize

rng = np.random.default_rng(0)
data = Dataset(rng.uniform(size=(1000, 4)), rng.uniform(size=(1000, 1)), FeatureBounds(0, 1))

# sensitivity of the identity query is (upper - lower) * p_x = 4
lap = calibrate("laplace", data.bounds, data.p_x, PrivacyBudget(2.0))
gau = calibrate("gaussian", data.bounds, data.p_x, PrivacyBudget(2.0, 1e-2))
print(f"sensitivity {lap.sensitivity:g}")
print(f"laplace scale {lap.scale:.4f}, noise variance {lap.noise_variance:.4f}")
print(f"gaussian sigma {gau.scale:.4f}, noise variance {gau.noise_variance:.4f}")

# the same seed always gives the same noisy copy
noisy = privatize(data, gau, seed=1)
print("outputs untouched:", np.array_equal(noisy.outputs, data.outputs))
print(f"empirical noise variance {np.var(noisy.features - data.features):.4f}")

# noise is not clamped, so private features leave the unit box
print(f"private feature range [{noisy.features.min():.2f}, {noisy.features.max():.2f}]")
