"""Priestley-Chao estimation of the trend and its derivatives.

    mu_hat^(v)(t) = (-1)^v / b^(v+1) * 1/n * sum_i sum_j (t_ij - t_i,j-1) K^(v)((t_ij - t)/b) Y_ij

with ``t_i0 = 0``. The estimator is linear in the data, so it is stored as a
sparse weight matrix that maps flat panel values to estimates on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .design import SamplingDesign
from .errors import BandwidthTooLarge, BandwidthTooSmall
from .fda import Panel
from .kernels import KernelOfOrder, eval_deriv

GRID_POINTS = 201


@dataclass(frozen=True)
class EstimateCurve:
    """Estimates on ``grid``; boundary points (within ``b`` of 0 or 1) are NaN."""

    grid: np.ndarray
    values: np.ndarray
    v: int
    b: float
    boundary_mask: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return ~self.boundary_mask


def default_grid(points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def boundary_mask(grid, b: float) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    return (grid < b) | (grid > 1.0 - b)


def pc_weights(design: SamplingDesign, kernel: KernelOfOrder, b: float, points, check_windows=True) -> sparse.csr_matrix:
    """Sparse ``(len(points), n_obs)`` matrix ``W`` with ``mu_hat = W @ Y``.

    Raises
    ------
    BandwidthTooLarge
        If ``b >= 1/2``.
    BandwidthTooSmall
        If ``check_windows`` and some subject has no observation within ``b``
        of an interior point.
    """
    if not 0.0 < b < 0.5:
        raise BandwidthTooLarge(f"bandwidth must lie in (0, 1/2), got {b}")
    points = np.atleast_1d(np.asarray(points, dtype=float))
    v = kernel.v
    t = design.t
    order = np.argsort(t, kind="stable")
    t_sorted = t[order]
    scale = (-1.0) ** v / (b ** (v + 1) * design.n)
    weight_all = design.spacings * scale
    interior = ~boundary_mask(points, b)
    rows, cols, vals = [], [], []
    for g, tp in enumerate(points):
        lo = np.searchsorted(t_sorted, tp - b, side="left")
        hi = np.searchsorted(t_sorted, tp + b, side="right")
        idx = order[lo:hi]
        if check_windows and interior[g]:
            hit = np.zeros(design.n, dtype=bool)
            hit[design.subject[idx]] = True
            if not hit.all():
                raise BandwidthTooSmall(
                    f"subject {int(np.argmin(hit))} has no observation within b={b} of t={tp:.6g}"
                )
        w = weight_all[idx] * eval_deriv(kernel, v, (t[idx] - tp) / b)
        rows.append(np.full(idx.size, g))
        cols.append(idx)
        vals.append(w)
    shape = (points.size, t.size)
    if not rows:
        return sparse.csr_matrix(shape)
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape)


def priestley_chao(panel: Panel, kernel: KernelOfOrder, b: float, grid=None) -> EstimateCurve:
    """Estimate ``mu^(v)`` on ``grid`` (default: 201 points on [0, 1]).

    Grid points within ``b`` of the boundary are masked (NaN); interior
    points require an observation of every subject inside the window.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    weights = pc_weights(panel.design, kernel, b, grid)
    mask = boundary_mask(grid, b)
    values = weights @ panel.values
    values[mask] = np.nan
    return EstimateCurve(grid, values, kernel.v, b, mask)


def sum_of_weights(design: SamplingDesign, kernel: KernelOfOrder, b: float, points) -> np.ndarray:
    """Estimator applied to ``Y == 1``; tends to 1 for ``v = 0`` in the interior."""
    return pc_weights(design, kernel, b, points) @ np.ones(design.times.size)
