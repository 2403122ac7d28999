"""Irregular integer-time sampling designs and their spacing diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateCell
from .seeding import DESIGN, derive_seed, make_rng

MAX_REDRAWS = 100


@dataclass(frozen=True)
class SamplingDesign:
    """Observation times ``T_ij`` for ``n`` subjects, stored flat.

    Subject ``i`` owns ``times[offsets[i]:offsets[i + 1]]``. Rescaled times are
    ``t_ij = T_ij / T_max`` with ``T_max`` the largest time over all subjects.
    Spacing statistics include the gap from ``t_i0 = 0`` to the first time.
    """

    times: np.ndarray
    offsets: np.ndarray
    generator: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.int64)
        offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        if offsets[0] != 0 or offsets[-1] != times.size or np.any(np.diff(offsets) < 1):
            raise ValueError("offsets must start at 0, end at len(times), and give each subject >= 1 time")
        times.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_ragged(cls, per_subject, generator="custom", params=None) -> SamplingDesign:
        arrays = [np.asarray(a, dtype=np.int64) for a in per_subject]
        offsets = np.concatenate([[0], np.cumsum([a.size for a in arrays])])
        return cls(np.concatenate(arrays), offsets, generator, dict(params or {}))

    @property
    def n(self) -> int:
        return self.offsets.size - 1

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def n_min(self) -> int:
        """``N = min_i N_i``."""
        return int(self.counts.min())

    @property
    def t_max(self) -> int:
        return int(self.times.max())

    @property
    def t(self) -> np.ndarray:
        return self.times / self.t_max

    @cached_property
    def unique_t(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct rescaled times and the inverse index back to the flat layout."""
        uniq, inverse = np.unique(self.t, return_inverse=True)
        uniq.setflags(write=False)
        inverse.setflags(write=False)
        return uniq, inverse

    @cached_property
    def subject(self) -> np.ndarray:
        """Subject index of every flat observation."""
        return np.repeat(np.arange(self.n), self.counts)

    @property
    def j(self) -> np.ndarray:
        """Within-subject index 1..N_i of every flat observation."""
        return np.arange(self.times.size) - np.repeat(self.offsets[:-1], self.counts) + 1

    def subject_times(self, i: int) -> np.ndarray:
        return self.times[self.offsets[i] : self.offsets[i + 1]]

    @property
    def spacings(self) -> np.ndarray:
        """``t_ij - t_i,j-1`` with ``t_i0 = 0``, flat and aligned with ``times``."""
        gaps = np.diff(self.times, prepend=0)
        gaps[self.offsets[:-1]] = self.times[self.offsets[:-1]]
        return gaps / self.t_max

    @property
    def alpha_n(self) -> float:
        """Reciprocal of the smallest realised spacing (inf if two times tie)."""
        smallest = self.spacings.min()
        return np.inf if smallest <= 0 else 1.0 / smallest

    @property
    def beta_n(self) -> float:
        """Reciprocal of the largest realised spacing."""
        return 1.0 / self.spacings.max()

    @property
    def description(self) -> dict:
        return {"generator": self.generator, **self.params}


def make_equidistant(n: int, n_points: int) -> SamplingDesign:
    """``T_ij = j`` for every subject, so ``t_ij = j / N``."""
    if n < 1 or n_points < 1:
        raise ValueError("n and n_points must be >= 1")
    times = np.tile(np.arange(1, n_points + 1), n)
    offsets = np.arange(n + 1) * n_points
    return SamplingDesign(times, offsets, "equidistant", {"n": n, "n_points": n_points})


def _jittered_subject(rng, n_points: int, scale: int, jitter: float) -> np.ndarray:
    centres = np.arange(1, n_points + 1) * scale
    half = jitter * scale
    lo = np.maximum(np.ceil(centres - half), 1).astype(np.int64)
    hi = np.floor(centres + half).astype(np.int64)
    return rng.integers(lo, hi + 1)


def make_jittered(n: int, n_points: int, jitter: float, seed=0, scale: int = 10) -> SamplingDesign:
    """Irregular design with one time per cell of a fine grid.

    Subject times are drawn uniformly from the integers within
    ``jitter * scale`` of the cell centres ``j * scale`` on a grid of
    ``M = scale * n_points`` points. For ``jitter < 1/2`` the cells do not
    overlap, realised spacings (in grid units) lie in
    ``[scale (1 - 2 jitter), scale (1 + 2 jitter)]`` and the max/min ratio is
    at most ``(1 + 2 jitter) / (1 - 2 jitter)``.

    ``seed`` may be an int master seed (subject ``i`` then uses the derived
    design stream ``(i,)``), a SeedSequence or a Generator.
    """
    if not 0.0 <= jitter < 0.5:
        raise ValueError("jitter must lie in [0, 1/2)")
    if n < 1 or n_points < 1 or scale < 1:
        raise ValueError("n, n_points and scale must be >= 1")
    subjects = []
    for i in range(n):
        rng = make_rng(derive_seed(seed, DESIGN, i)) if isinstance(seed, (int, np.integer)) else make_rng(seed)
        for _ in range(MAX_REDRAWS):
            times = _jittered_subject(rng, n_points, scale, jitter)
            if np.all(np.diff(times) > 0):
                break
        else:
            raise DegenerateCell(f"subject {i}: colliding times after {MAX_REDRAWS} redraws")
        subjects.append(times)
    params = {"n": n, "n_points": n_points, "jitter": jitter, "scale": scale}
    if isinstance(seed, (int, np.integer)):
        params["seed"] = int(seed)
    return SamplingDesign.from_ragged(subjects, "jittered", params)


def make_poisson(n: int, n_points: int, seed=0, mean_gap: float = 10.0) -> SamplingDesign:
    """Arrival-process design with Poisson-distributed integer gaps.

    Gaps of zero occur with positive probability, so this design can violate
    the spacing bounds; :func:`check_design` reports that rather than
    certifying constants. Intended as a stress test.
    """
    subjects = []
    for i in range(n):
        rng = make_rng(derive_seed(seed, DESIGN, i)) if isinstance(seed, (int, np.integer)) else make_rng(seed)
        gaps = rng.poisson(mean_gap, size=n_points)
        gaps[0] = max(gaps[0], 1)
        subjects.append(np.cumsum(gaps))
    params = {"n": n, "n_points": n_points, "mean_gap": mean_gap}
    if isinstance(seed, (int, np.integer)):
        params["seed"] = int(seed)
    return SamplingDesign.from_ragged(subjects, "poisson", params)


@dataclass
class DesignReport:
    """Outcome of :func:`check_design`."""

    min_spacing: float
    max_spacing: float
    alpha_n: float
    beta_n: float
    monotone_times: bool
    spacing_bounds: bool
    rescaling_exact: bool
    spacing_statistic: float
    smoothing_statistic: float
    spacing_trend: list = field(default_factory=list)
    smoothing_trend: list = field(default_factory=list)
    spacing_trend_decreasing: bool | None = None
    smoothing_trend_increasing: bool | None = None

    @property
    def ok(self) -> bool:
        return self.monotone_times and self.spacing_bounds and self.rescaling_exact

    def lines(self) -> list[str]:
        out = [
            f"min spacing            {self.min_spacing:.6g}",
            f"max spacing            {self.max_spacing:.6g}",
            f"alpha_N (1/min)        {self.alpha_n:.6g}",
            f"beta_N (1/max)         {self.beta_n:.6g}",
            f"monotone times         {self.monotone_times}",
            f"spacing bounds         {self.spacing_bounds}",
            f"exact rescaling        {self.rescaling_exact}",
            f"(b a)^(1+(1-2d)q)(b B)^-2  {self.spacing_statistic:.6g}",
            f"b^(k+1) beta_N         {self.smoothing_statistic:.6g}",
        ]
        if self.spacing_trend:
            out.append(f"spacing trend decreasing   {self.spacing_trend_decreasing}")
            out.append(f"smoothing trend increasing {self.smoothing_trend_increasing}")
        return out


def spacing_statistic(b: float, alpha_n: float, beta_n: float, d: float, q: int) -> float:
    """``(b alpha_N)^(1 + (1-2d) q) * (b beta_N)^(-2)``, required to vanish."""
    return (b * alpha_n) ** (1.0 + (1.0 - 2.0 * d) * q) * (b * beta_n) ** -2.0


def check_design(design: SamplingDesign, b: float, d: float, q: int, k: int = 2, sequence=None) -> DesignReport:
    """Spacing diagnostics for the estimator's design conditions.

    Parameters
    ----------
    design : SamplingDesign
    b : float
        Bandwidth.
    d, q : float, int
        Memory parameter and Hermite rank.
    k : int
        Kernel order, for ``b^(k+1) beta_N``.
    sequence : iterable of (N, b), optional
        Asymptotic path along which the two statistics are evaluated. Spacing
        rates are extrapolated linearly in ``N`` from the realised design,
        which is exact for equidistant designs.
    """
    gaps = design.spacings
    within = np.concatenate(
        [np.diff(design.subject_times(i)) for i in range(design.n)]
    )
    monotone = bool(np.all(within >= 0) and design.times.min() >= 0)
    lo, hi = float(gaps.min()), float(gaps.max())
    alpha_n, beta_n = design.alpha_n, design.beta_n
    # the rates are reciprocals of the extremes; allow for one rounding each way
    slack = 1.0 + 1e-12
    bounds = bool(lo > 0 and alpha_n >= beta_n > 0 and 1.0 / alpha_n <= lo * slack and hi <= slack / beta_n)
    exact = bool(np.all(np.round(design.t * design.t_max).astype(np.int64) == design.times))
    report = DesignReport(
        min_spacing=lo,
        max_spacing=hi,
        alpha_n=alpha_n,
        beta_n=beta_n,
        monotone_times=monotone,
        spacing_bounds=bounds,
        rescaling_exact=exact,
        spacing_statistic=spacing_statistic(b, alpha_n, beta_n, d, q),
        smoothing_statistic=b ** (k + 1) * beta_n,
    )
    if sequence is not None:
        n0 = design.n_min
        for n_pts, b_seq in sequence:
            ratio = n_pts / n0
            report.spacing_trend.append(spacing_statistic(b_seq, alpha_n * ratio, beta_n * ratio, d, q))
            report.smoothing_trend.append(b_seq ** (k + 1) * beta_n * ratio)
        report.spacing_trend_decreasing = bool(np.all(np.diff(report.spacing_trend) < 0))
        report.smoothing_trend_increasing = bool(np.all(np.diff(report.smoothing_trend) > 0))
    return report
