"""
A small Monte Carlo rate study
==============================

Studies take one configuration document and return tables, log-log slope
fits and pass/fail checks. Here the bias of a noise-free estimator is
traced over a bandwidth grid and written to disk.
"""

import math
import sys
import tempfile

from lrdtrend.harness import ExperimentConfig, emit_report, run_study
from lrdtrend.harness.report import summary_text

config = ExperimentConfig.from_dict(
    {
        "model": {"trend": {"name": "sine", "phase": math.pi / 4}},
        "design": {"n": 1, "N": 10_000},
        "study": {"kind": "bias", "bandwidths": [0.05, 0.07, 0.1, 0.14, 0.2]},
    }
)
result = run_study(config)
sys.stdout.write(summary_text(result))

# a small noisy variance study; far fewer replicates than the acceptance run
config = ExperimentConfig.from_dict(
    {
        "design": {"N": 2000},
        "study": {"kind": "variance", "bandwidths": [0.1], "replicates": 300, "n_values": [10, 40]},
    }
)
result = run_study(config)
for row in result.tables["variance"].rows:
    print(f"n={row['n']:>3} t={row['t']:.1f}  n*var={row['n_var']:.3f}  C_var={row['c_var']:.3f}")

with tempfile.TemporaryDirectory() as out:
    files = emit_report(result, out)
    print("wrote", ", ".join(p.name for p in files))
