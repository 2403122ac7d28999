"""
Simulating repeated time series and estimating the trend
========================================================

Each subject is observed along its own integer clock. The observation is a
smooth trend plus a random curve plus long-memory errors. We simulate one
panel, then smooth it with the Priestley-Chao estimator.
"""

import numpy as np

from lrdtrend import (
    LrdGaussianModel,
    TheoryConstants,
    build_default_kernel,
    default_model,
    generate_panel,
    make_jittered,
    priestley_chao,
)
from lrdtrend.hermite import hermite2

# 50 subjects, 2000 irregular observations each
design = make_jittered(50, 2000, jitter=0.4, seed=1)
print(f"{design.n} subjects, T_max = {design.t_max}, beta_N = {design.beta_n:.0f}")

# trend sin(2 pi t), three cosine eigenfunctions, chi-square type errors
model = default_model()
lrd = LrdGaussianModel(0.4)
panel = generate_panel(model, design, lrd, hermite2(), seed=2024)
print("first values of subject 0:", np.round(panel.subject_values(0)[:5], 3))

# the trend and its first derivative
grid = np.linspace(0.0, 1.0, 21)
for v, b in ((0, 0.1), (1, 0.15)):
    curve = priestley_chao(panel, build_default_kernel(v), b, grid)
    truth = model.trend(grid, v)
    err = np.nanmax(np.abs(curve.values - truth))
    print(f"v={v}, b={b}: max interior error {err:.3f} (scale of mu^({v}) is {np.max(np.abs(truth)):.2f})")

# pointwise constants behind the error above
const = TheoryConstants(model, build_default_kernel(0), lrd, hermite2())
t = np.array([0.25, 0.5, 0.75])
print("C_bias(t):", np.round(const.c_bias(t), 4))
print("C_var(t): ", np.round(const.c_var(t), 4))
print("I_q(t):   ", np.round(const.i_q(t), 4))
