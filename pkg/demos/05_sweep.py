"""
A privacy sweep end to end
==========================

Split, privatize, train three estimators and score them on clean data for
a grid of privacy budgets, then write ``results.csv`` and ``plot.svg``.
"""

import sys
from pathlib import Path

from dprl.experiment import SweepConfig, gaussian_surrogate, run_sweep
from dprl.report import emit_report

out = Path(sys.argv[1] if len(sys.argv) > 1 else "sweep_out")

# a 10-feature jointly Gaussian table scaled into the unit box
data = gaussian_surrogate(n=2000, p_x=10, seed=0)

# default grid: 8 points log-spaced over [1, 100] / p_x
sweep = SweepConfig(n_train=50, delta=1e-2, seeds=tuple(range(5)))
table = run_sweep(data, sweep)

for method, curve in table.mean_test_loss().items():
    print(f"{method:13s}", " ".join(f"{v:.5f}" for v in curve.values()))

csv_path, svg_path = emit_report(table, out, title="gaussian surrogate, 5 seeds")
print("wrote", csv_path, "and", svg_path)
