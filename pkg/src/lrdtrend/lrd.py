"""Stationary long-memory Gaussian processes on the integer grid.

The latent process is fractional Gaussian noise with Hurst index
``H = d + 1/2``. Its autocovariance is known in closed form,

    gamma(v) = (|v+1|^{2H} - 2|v|^{2H} + |v-1|^{2H}) / 2,

and decays like ``c_z * v^{2d-1}`` with ``c_z = H(2H-1)``. Paths are drawn
exactly with circulant embedding (Davies-Harte); a dense Cholesky sampler is
kept as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy import linalg

from .errors import EmbeddingFailure, IndexOutOfRange, NotPositiveDefinite
from .seeding import make_rng

# reject when min eigenvalue < -EMBED_RTOL * max eigenvalue, clamp anything smaller
EMBED_RTOL = 1e-9
ORACLE_MAX_LENGTH = 4096


@dataclass(frozen=True)
class LrdGaussianModel:
    """Unit-variance fractional Gaussian noise with memory parameter ``d``."""

    d: float

    def __post_init__(self):
        if not 0.0 < self.d < 0.5:
            raise ValueError(f"memory parameter must satisfy 0 < d < 1/2, got {self.d}")

    @property
    def hurst(self) -> float:
        return self.d + 0.5

    @property
    def c_z(self) -> float:
        """Constant in ``gamma(v) ~ c_z v^(2d-1)``."""
        h = self.hurst
        return h * (2.0 * h - 1.0)

    def autocovariance(self, lag):
        return autocovariance(self, lag)

    @property
    def description(self) -> dict:
        return {"d": self.d}


def autocovariance(model: LrdGaussianModel, lag):
    """Exact fGn autocovariance at integer ``lag`` (scalar or array).

    >>> round(autocovariance(LrdGaussianModel(0.2), 1), 4)
    0.3195
    """
    lag_arr = np.asarray(lag)
    if np.any(lag_arr < 0):
        raise ValueError("lag must be non-negative")
    k = np.abs(lag_arr).astype(float)
    two_h = 2.0 * model.hurst
    gamma = 0.5 * ((k + 1.0) ** two_h - 2.0 * k**two_h + np.abs(k - 1.0) ** two_h)
    if gamma.ndim == 0:
        return float(gamma)
    return gamma


@dataclass(frozen=True)
class GaussianPath:
    """One realisation of Z at integer times 1..t_max.

    ``values[T - 1]`` holds Z(T).
    """

    values: np.ndarray
    model: LrdGaussianModel
    seed: object = field(default=None, compare=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.values.shape[0]

    def at(self, times) -> np.ndarray:
        """Values of Z at the integer times ``times`` (1-based)."""
        times = np.asarray(times)
        if times.size and (times.min() < 1 or times.max() > len(self)):
            raise IndexOutOfRange(
                f"times must lie in 1..{len(self)}, got range "
                f"[{times.min()}, {times.max()}]"
            )
        return self.values[times - 1]


def _embedding_length(t_max: int) -> int:
    """Even FFT-friendly circulant size ``2(m-1)`` with ``m >= t_max``."""
    size = sfft.next_fast_len(2 * (t_max - 1), real=True)
    while size % 2:
        size = sfft.next_fast_len(size + 1, real=True)
    return size


@lru_cache(maxsize=64)
def _sqrt_half_spectrum(d: float, size: int) -> np.ndarray:
    """Square roots of the circulant eigenvalues for indices 0..size/2."""
    m = size // 2 + 1
    gamma = autocovariance(LrdGaussianModel(d), np.arange(m))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = sfft.rfft(row).real
    lo, hi = eig.min(), eig.max()
    if lo < -EMBED_RTOL * hi:
        raise EmbeddingFailure(
            f"circulant embedding of size {size} has eigenvalue {lo:.3e} "
            f"(max {hi:.3e}); use simulate_path_oracle"
        )
    out = np.sqrt(np.clip(eig, 0.0, None))
    out.setflags(write=False)
    return out


def _draw_embedded(model: LrdGaussianModel, t_max: int, rngs) -> np.ndarray:
    """One embedded draw per generator in ``rngs``, returned as rows."""
    size = _embedding_length(t_max)
    root = _sqrt_half_spectrum(model.d, size)
    half = size // 2
    normals = np.stack([rng.standard_normal(size) for rng in rngs])
    coef = np.empty((len(rngs), half + 1), dtype=complex)
    coef[:, 0] = normals[:, 0]
    coef[:, half] = normals[:, 1]
    coef[:, 1:half] = (normals[:, 2 : half + 1] + 1j * normals[:, half + 1 :]) / np.sqrt(2.0)
    paths = sfft.irfft(root * coef, n=size, axis=1) * np.sqrt(size)
    return paths[:, :t_max]


def simulate_path(model: LrdGaussianModel, t_max: int, seed=None) -> GaussianPath:
    """Exact sample of Z(1..t_max) by circulant embedding.

    Parameters
    ----------
    model : LrdGaussianModel
    t_max : int
        Path length.
    seed : int, SeedSequence or Generator, optional
        Reproducibility token. Identical seeds give bit-identical paths.

    Raises
    ------
    EmbeddingFailure
        If the circulant embedding is not non-negative definite.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    rng = make_rng(seed)
    return GaussianPath(_sample(model, t_max, [rng])[0], model, seed)


def _sample(model: LrdGaussianModel, t_max: int, rngs) -> np.ndarray:
    if t_max == 1:
        return np.stack([rng.standard_normal(1) for rng in rngs])
    return _draw_embedded(model, t_max, rngs)


def simulate_paths(model: LrdGaussianModel, t_max: int, seeds) -> np.ndarray:
    """Independent paths, one row per entry of ``seeds``.

    Row ``i`` equals ``simulate_path(model, t_max, seeds[i]).values``.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    seeds = list(seeds)
    if not seeds:
        return np.empty((0, t_max))
    return _sample(model, t_max, [make_rng(s) for s in seeds])


@lru_cache(maxsize=16)
def _toeplitz_cholesky(d: float, t_max: int) -> np.ndarray:
    cov = linalg.toeplitz(autocovariance(LrdGaussianModel(d), np.arange(t_max)))
    try:
        factor = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        min_eig = linalg.eigvalsh(cov).min()
        raise NotPositiveDefinite(
            f"Toeplitz covariance of length {t_max} not positive definite "
            f"(minimum eigenvalue {min_eig:.3e})"
        ) from exc
    factor.setflags(write=False)
    return factor


def simulate_path_oracle(model: LrdGaussianModel, t_max: int, seed=None) -> GaussianPath:
    """Brute-force sample via the Cholesky factor of the exact covariance."""
    if not 1 <= t_max <= ORACLE_MAX_LENGTH:
        raise ValueError(f"oracle supports 1 <= t_max <= {ORACLE_MAX_LENGTH}")
    rng = make_rng(seed)
    factor = _toeplitz_cholesky(model.d, t_max)
    return GaussianPath(factor @ rng.standard_normal(t_max), model, seed)
