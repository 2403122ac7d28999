"""Hermite expansions of Gaussian-subordinated errors.

Errors are pointwise transforms ``eps = G(Z, t)`` of the latent Gaussian
process. With probabilists' Hermite polynomials ``H_k`` (``E[H_j H_k] = k!`` under
N(0, 1)) a centred, square-integrable ``G`` expands as

    G(z, t) = sum_{k >= q} c_k(t) / k! * H_k(z),   c_k(t) = E[G(Z, t) H_k(Z)],

and two errors at lag ``v`` have covariance ``sum_k c_k(t1) c_k(t2) / k! * gamma(v)^k``.
The smallest ``q`` with a non-zero coefficient is the Hermite rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import hermite_e
from scipy.special import log_ndtr

from .errors import IndexOutOfRange, QuadratureUnstable
from .lrd import GaussianPath, LrdGaussianModel, autocovariance

K_MAX = 20
NODES = 128
RANK_TOL = 1e-8
STABILITY_RTOL = 1e-8
RANK_PROBE_GRID = np.linspace(0.0, 1.0, 11)


def hermite_eval(k: int, z):
    """Probabilists' Hermite polynomial ``H_k`` at ``z`` by three-term recurrence."""
    if k < 0:
        raise ValueError("k must be non-negative")
    z = np.asarray(z, dtype=float)
    h_prev, h = np.ones_like(z), z.copy()
    if k == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    for j in range(1, k):
        h_prev, h = h, z * h - j * h_prev
    return h if h.ndim else float(h)


def hermite_table(k_max: int, z) -> np.ndarray:
    """Array of shape ``(k_max + 1, *z.shape)`` holding ``H_0(z) .. H_kmax(z)``."""
    z = np.asarray(z, dtype=float)
    out = np.empty((k_max + 1,) + z.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = z
    for j in range(1, k_max):
        out[j + 1] = z * out[j] - j * out[j - 1]
    return out


@lru_cache(maxsize=16)
def _gauss_hermite(nodes: int):
    """Nodes and weights integrating against the standard normal density."""
    x, w = hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2.0 * math.pi)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gaussian_expectation(func: Callable, nodes: int = NODES) -> float:
    """E[func(Z)] for standard normal Z by Gauss-Hermite quadrature."""
    x, w = _gauss_hermite(nodes)
    return float(np.dot(w, func(x)))


@dataclass
class SubordinationMap:
    """A transform ``G(z, t)`` together with its quadrature-based centring.

    Parameters
    ----------
    transform : callable
        ``transform(z, t)`` broadcasting over arrays.
    rank_hint : int, optional
        Expected Hermite rank, checked by :func:`hermite_rank` if given.
    centered : bool
        Whether ``transform`` already has mean zero for every ``t``. If not,
        the Gauss-Hermite mean is subtracted pointwise in ``t``.
    name, params :
        Registry identity, used for serialising provenance.
    """

    transform: Callable
    rank_hint: int | None = None
    centered: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)
    nodes: int = NODES
    _coeff_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def mean(self, t) -> np.ndarray:
        """Quadrature mean E[transform(Z, t)] for each entry of ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x, w = _gauss_hermite(self.nodes)
        vals = self.transform(x[:, None], t[None, :])
        return w @ np.broadcast_to(vals, (x.size, t.size))

    def __call__(self, z, t):
        z = np.asarray(z, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), z.shape)
        g = np.broadcast_to(self.transform(z, t), z.shape).astype(float)
        if self.centered:
            return g
        uniq, inverse = np.unique(t, return_inverse=True)
        return g - self.mean(uniq)[inverse.reshape(z.shape)]

    def second_moment(self, t, nodes: int | None = None) -> float:
        """E[G(Z, t)^2] of the centred transform."""
        x, w = _gauss_hermite(nodes or self.nodes)
        g = self(x, np.full_like(x, float(t)))
        return float(np.dot(w, g * g))

    @property
    def description(self) -> dict:
        return {"transform": self.name, **self.params}


@dataclass(frozen=True)
class HermiteCoefficients:
    """``coeffs[k] = c_k(t)`` for ``k = 0..truncation``; ``coeffs[0]`` is 0."""

    t: float
    coeffs: np.ndarray
    rank: int
    truncation: int

    def variance(self) -> float:
        """Truncated Parseval sum ``sum_k c_k^2 / k!``."""
        k = np.arange(self.truncation + 1)
        return float(np.sum(self.coeffs**2 / _factorials(k)))

    def __getitem__(self, k: int) -> float:
        return float(self.coeffs[k])


def _factorials(k) -> np.ndarray:
    return np.array([math.factorial(int(j)) for j in np.atleast_1d(k)], dtype=float)


def _raw_coefficients(smap: SubordinationMap, t: float, k_max: int, nodes: int) -> np.ndarray:
    x, w = _gauss_hermite(nodes)
    g = smap(x, np.full_like(x, t))
    coeffs = hermite_table(k_max, x) @ (w * g)
    coeffs[0] = 0.0
    return coeffs


def _rank_of(coeffs: np.ndarray, tol: float) -> int:
    above = np.nonzero(np.abs(coeffs[1:]) > tol)[0]
    return int(above[0]) + 1 if above.size else 0


def hermite_coefficients(
    smap: SubordinationMap,
    t: float,
    k_max: int = K_MAX,
    nodes: int = NODES,
    rank_tol: float = RANK_TOL,
) -> HermiteCoefficients:
    """Hermite coefficients ``c_1(t) .. c_kmax(t)`` by Gauss-Hermite quadrature.

    The computation is repeated with twice the nodes; a change in any
    ``c_k`` larger than ``1e-8 * sqrt(k!) * ||G||`` raises
    :class:`QuadratureUnstable`. The scale ``sqrt(k!) ||G||`` bounds ``|c_k|``
    by Cauchy-Schwarz, so the check is relative to the largest value the
    coefficient could take.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if nodes < 2 * k_max:
        raise ValueError(f"nodes must be >= 2*k_max = {2 * k_max}")
    key = (float(t), k_max, nodes)
    cached = smap._coeff_cache.get(key)
    if cached is not None:
        return cached
    coeffs = _raw_coefficients(smap, float(t), k_max, nodes)
    fine = _raw_coefficients(smap, float(t), k_max, 2 * nodes)
    norm = math.sqrt(max(smap.second_moment(t, 2 * nodes), 0.0))
    scale = np.sqrt(_factorials(np.arange(k_max + 1))) * max(norm, 1e-300)
    drift = np.abs(coeffs - fine) / scale
    if np.any(drift > STABILITY_RTOL):
        k_bad = int(np.argmax(drift))
        raise QuadratureUnstable(
            f"c_{k_bad}(t={t}) moved by {drift[k_bad]:.2e} (relative) when nodes "
            f"doubled from {nodes}; transform too rough for this budget"
        )
    coeffs.setflags(write=False)
    out = HermiteCoefficients(float(t), coeffs, _rank_of(coeffs, rank_tol), k_max)
    smap._coeff_cache[key] = out
    return out


def hermite_rank(
    smap: SubordinationMap,
    t_grid=RANK_PROBE_GRID,
    k_max: int = K_MAX,
    nodes: int = NODES,
    rank_tol: float = RANK_TOL,
) -> int:
    """Smallest ``k >= 1`` with ``|c_k(t)| > rank_tol`` at some probed ``t``.

    Returns 0 for the zero transform.
    """
    table = np.array([hermite_coefficients(smap, t, k_max, nodes).coeffs for t in t_grid])
    rank = _rank_of(np.max(np.abs(table), axis=0), rank_tol)
    if smap.rank_hint is not None and rank != smap.rank_hint:
        raise ValueError(f"detected Hermite rank {rank} but rank_hint is {smap.rank_hint}")
    return rank


def subordinate(smap: SubordinationMap, path: GaussianPath, times, rescaled) -> np.ndarray:
    """Errors ``G(Z(T_j), t_j)`` for integer times ``T_j`` and rescaled ``t_j``."""
    times = np.asarray(times)
    if times.size and (times.min() < 1 or times.max() > len(path)):
        raise IndexOutOfRange(f"observation times exceed path length {len(path)}")
    return smap(path.at(times), np.asarray(rescaled, dtype=float))


def asymptotic_error_covariance(
    coeffs_1: HermiteCoefficients,
    coeffs_2: HermiteCoefficients,
    model: LrdGaussianModel,
    lag: int,
) -> float:
    """Covariance of errors at rescaled times t1, t2 separated by integer ``lag``.

    Uses the truncated Hermite sum ``sum_l c_l(t1) c_l(t2) / l! * gamma(lag)^l``.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    k_max = min(coeffs_1.truncation, coeffs_2.truncation)
    k = np.arange(1, k_max + 1)
    gamma = autocovariance(model, lag)
    terms = coeffs_1.coeffs[1 : k_max + 1] * coeffs_2.coeffs[1 : k_max + 1] / _factorials(k)
    return float(np.sum(terms * gamma**k))


def long_memory_inherited(d: float, q: int) -> bool:
    """Whether ``1/2 - 1/(2q) < d < 1/2``, i.e. the errors keep long memory."""
    return q >= 1 and 0.5 - 0.5 / q < d < 0.5


# ---------------------------------------------------------------------------
# built-in transforms
# ---------------------------------------------------------------------------


def _as_time_function(value) -> Callable:
    """Constant, polynomial coefficient list, or callable -> callable of ``t``."""
    if callable(value):
        return value
    if np.ndim(value) == 0:
        const = float(value)
        return lambda t: np.full_like(np.asarray(t, dtype=float), const)
    coeffs = np.asarray(value, dtype=float)
    return lambda t: np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), coeffs)


def identity() -> SubordinationMap:
    """``G(z, t) = z`` (Gaussian errors, rank 1)."""
    return SubordinationMap(lambda z, t: z, rank_hint=1, centered=True, name="identity")


def hermite2(scale=1.0) -> SubordinationMap:
    """``G(z, t) = s(t) (z^2 - 1)`` (chi-square type errors, rank 2)."""
    s = _as_time_function(scale)
    return SubordinationMap(
        lambda z, t: s(t) * (z * z - 1.0),
        rank_hint=2,
        centered=True,
        name="hermite2",
        params={"scale": scale} if not callable(scale) else {},
    )


def linear_combination(a, b) -> SubordinationMap:
    """``G(z, t) = a(t) z + b(t) (z^2 - 1)``.

    ``a`` and ``b`` may be constants, ascending polynomial coefficient lists in
    ``t``, or callables. The rank is 1 unless ``a`` vanishes identically.
    """
    fa, fb = _as_time_function(a), _as_time_function(b)
    params = {}
    if not callable(a) and not callable(b):
        params = {"a": a, "b": b}
    return SubordinationMap(
        lambda z, t: fa(t) * z + fb(t) * (z * z - 1.0),
        centered=True,
        name="linear",
        params=params,
    )


def exponential_marginal(scale=1.0) -> SubordinationMap:
    """Errors with a centred exponential marginal of scale ``s(t)``.

    ``G(z, t) = F_t^{-1}(Phi(z)) - s(t)`` where ``F_t`` is the exponential CDF with
    mean ``s(t)``; evaluated as ``s(t) * (-log Phi(-z) - 1)`` for accuracy in the
    upper tail.
    """
    s = _as_time_function(scale)
    return SubordinationMap(
        lambda z, t: s(t) * (-log_ndtr(-z) - 1.0),
        rank_hint=1,
        centered=True,
        name="exponential",
        params={"scale": scale} if not callable(scale) else {},
    )


def zero() -> SubordinationMap:
    """``G = 0``: noise switched off."""
    return SubordinationMap(lambda z, t: np.zeros_like(z), centered=True, name="zero")


TRANSFORMS = {
    "identity": identity,
    "hermite2": hermite2,
    "linear": linear_combination,
    "exponential": exponential_marginal,
    "zero": zero,
}


def make_transform(name: str, **params) -> SubordinationMap:
    """Build a registered transform by name."""
    try:
        factory = TRANSFORMS[name]
    except KeyError:
        raise ValueError(f"unknown transform {name!r}; choose from {sorted(TRANSFORMS)}") from None
    return factory(**params)
