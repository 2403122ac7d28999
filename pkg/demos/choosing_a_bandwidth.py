"""
Choosing an admissible bandwidth
================================

The central limit theorem needs a bandwidth that is small enough to make
the bias negligible and large enough to keep the long-memory part of the
variance under control. The two bounds give a window that may be empty.
"""

from lrdtrend import bandwidth_window

# estimating the trend itself
w = bandwidth_window(n=100, n_points=10_000, d=0.3, q=1, v=0, k=2)
print(f"v=0: [{w.b_low:.3f}, {w.b_high:.3f}) feasible={w.feasible}")

# the second derivative needs many more points per curve
w = bandwidth_window(n=100, n_points=10_000, d=0.3, q=1, v=2, k=4)
print(f"v=2: [{w.b_low:.3f}, {w.b_high:.3f}) feasible={w.feasible}, requires {w.growth_condition}")

# stronger memory pushes the floor towards 1
for d in (0.1, 0.3, 0.45, 0.49):
    w = bandwidth_window(n=100, n_points=10_000, d=d)
    print(f"d={d}: b_low={w.b_low:.3f}")
