"""Closed-form asymptotic constants and admissible bandwidth windows.

Pointwise in the interior, the estimator of ``mu^(v)`` has

    bias     ~ (-1)^v b^(k-v) * mu^(k)(t) / k! * int K^(v)(x) x^k dx
    variance ~ n^-1 sum_l lambda_l phi_l^(v)(t)^2
               + n^-1 b^(-2v) (T_max b)^((2d-1)q) I_q(t),

    I_q(t) = c_q(t)^2 / q! * c_Z^q * int int K^(v)(x) K^(v)(y) |x - y|^((2d-1)q) dx dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .design import SamplingDesign
from .errors import InfeasibleWindow
from .estimator import pc_weights
from .fda import FunctionalModel
from .hermite import K_MAX, SubordinationMap, hermite_coefficients, hermite_rank, long_memory_inherited
from .kernels import KernelOfOrder, double_kernel_integral
from .lrd import LrdGaussianModel, autocovariance


def theory_bias(model: FunctionalModel, kernel: KernelOfOrder, t, b: float):
    """Leading bias ``(-1)^v b^(k-v) mu^(k)(t) / k! * theta``.

    The sign ``(-1)^v`` comes from the estimator's prefactor and matters
    only for odd ``v``.
    """
    k, v = kernel.k, kernel.v
    return (-1) ** v * b ** (k - v) * model.trend(t, k) / math.factorial(k) * float(kernel.theta)


@dataclass
class TheoryConstants:
    """Pointwise constants for one (model, kernel, errors) combination.

    ``lrd`` and ``smap`` may be None for noise-free models, in which case the
    long-memory constant is zero.
    """

    model: FunctionalModel
    kernel: KernelOfOrder
    lrd: LrdGaussianModel | None = None
    smap: SubordinationMap | None = None
    q: int | None = None
    _iq_cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.smap is not None and self.q is None:
            self.q = hermite_rank(self.smap)

    @property
    def v(self) -> int:
        return self.kernel.v

    def c_bias(self, t):
        k, v = self.kernel.k, self.kernel.v
        return (-1) ** v * self.model.trend(t, k) / math.factorial(k) * float(self.kernel.theta)

    def c_var(self, t):
        return self.model.covariance(t, t, self.v)

    def c_cov(self, s, t):
        """Limit covariance ``sum_l lambda_l phi_l^(v)(s) phi_l^(v)(t)``."""
        return self.model.covariance(s, t, self.v)

    def truncation_error(self, t):
        """``sum_{l > L} lambda_l phi_l^(v)(t)^2`` over the model's recorded tail."""
        t = np.asarray(t, dtype=float)
        return sum((lam * phi(t, self.v) ** 2 for lam, phi in self.model.tail), np.zeros_like(t))

    @property
    def exponent(self) -> float:
        """``(2d - 1) q``."""
        return (2.0 * self.lrd.d - 1.0) * self.q

    @cached_property
    def kernel_double_integral(self) -> float:
        return double_kernel_integral(self.kernel, self.exponent, order=self.v)

    def i_q(self, t):
        if self.smap is None or self.lrd is None or not self.q:
            return np.zeros_like(np.asarray(t, dtype=float))
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        cq = np.array([hermite_coefficients(self.smap, float(x)).coeffs[self.q] for x in t_arr])
        out = cq**2 / math.factorial(self.q) * self.lrd.c_z**self.q * self.kernel_double_integral
        return out if np.ndim(t) else float(out[0])


@dataclass(frozen=True)
class VarianceTheory:
    leading: float
    correction_orders: dict
    lrd_term: float

    @property
    def total(self) -> float:
        return self.leading + self.lrd_term


def lrd_variance_term(constants: TheoryConstants, n: int, b: float, t_max: int, t):
    """``n^-1 b^(-2v) (T_max b)^((2d-1)q) I_q(t)``."""
    if constants.smap is None or constants.lrd is None:
        return 0.0 * np.asarray(t, dtype=float)
    v = constants.v
    return b ** (-2 * v) * (t_max * b) ** constants.exponent * constants.i_q(t) / n


def theory_variance(constants: TheoryConstants, n: int, b: float, t_max: int, d: float, q: int, v: int, k: int, t) -> VarianceTheory:
    """Leading variance term, the orders of its two corrections, and the explicit long-memory term."""
    if not long_memory_inherited(d, q):
        raise ValueError(f"need 1/2 - 1/(2q) < d < 1/2, got d={d}, q={q}")
    leading = float(constants.c_var(t)) / n
    corrections = {
        "smoothing": b ** (k - v),
        "long_memory": b ** (-2 * v) * (t_max * b) ** ((2 * d - 1) * q),
    }
    lrd_term = float(lrd_variance_term(constants, n, b, t_max, t)) if constants.smap is not None else 0.0
    return VarianceTheory(leading, corrections, lrd_term)


def finite_sample_variance(
    design: SamplingDesign,
    kernel: KernelOfOrder,
    b: float,
    t: float,
    model: FunctionalModel,
    lrd: LrdGaussianModel | None,
    smap: SubordinationMap | None,
    k_max: int = K_MAX,
) -> tuple[float, float]:
    """Exact variance of ``mu_hat^(v)(t)``, split into curve and error parts.

    Uses the weight vector of the estimator, the score variances, and the
    error covariance ``sum_k c_k(t1) c_k(t2) / k! gamma(T1 - T2)^k``.
    """
    w_row = pc_weights(design, kernel, b, [t], check_windows=False).tocoo()
    idx, w = w_row.col, w_row.data
    subj = design.subject[idx]
    tt = design.t[idx]
    lam = np.asarray(model.eigenvalues, dtype=float)
    curve = 0.0
    if model.n_basis:
        proj = model.basis_values(tt) * w  # (L, m)
        per_subject = np.zeros((model.n_basis, design.n))
        np.add.at(per_subject.T, subj, proj.T)
        curve = float(lam @ np.sum(per_subject**2, axis=1))
    noise = 0.0
    if smap is not None:
        uniq, inv = np.unique(tt, return_inverse=True)
        coeff = np.array([hermite_coefficients(smap, float(x), k_max).coeffs for x in uniq])[inv]
        fact = np.array([math.factorial(j) for j in range(k_max + 1)], dtype=float)
        for i in np.unique(subj):
            sel = subj == i
            times = design.times[idx[sel]]
            gamma = autocovariance(lrd, np.abs(times[:, None] - times[None, :]))
            a = coeff[sel] * w[sel, None]
            g_pow = np.ones_like(gamma)
            for j in range(1, k_max + 1):
                g_pow = g_pow * gamma
                if np.any(a[:, j]):
                    noise += a[:, j] @ g_pow @ a[:, j] / fact[j]
    return curve, float(noise)


# ---------------------------------------------------------------------------
# bandwidth windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandwidthWindow:
    b_low: float
    b_high: float
    feasible: bool
    growth_condition: str
    note: str = ""

    def contains(self, b: float) -> bool:
        return self.b_low <= b < self.b_high


def lower_exponent(d: float, q: int, v: int) -> float:
    """``e`` in ``b_low = c * N^-e`` for equidistant designs.

    From ``b^(2(v+2)) N^2 (N b)^(-(2d+1)q) > C``; for ``q = 1`` this is
    ``(1-2d)/(2v+3-2d)``, i.e. ``(1-2d)/(3-2d)`` for ``v = 0`` and
    ``(1-2d)/(7-2d)`` for ``v = 2``.
    """
    a = (2.0 * d + 1.0) * q
    return (2.0 - a) / (2.0 * (v + 2) - a)


def bandwidth_window(
    n: int,
    n_points: int,
    d: float,
    q: int = 1,
    v: int = 0,
    k: int = 2,
    c_lower: float = 1.0,
    beta_n: float | None = None,
    t_max: float | None = None,
    raise_if_empty: bool = False,
) -> BandwidthWindow:
    """Admissible bandwidths ``c N^-e <= b < n^(-1/(2(k-v)))``.

    The ceiling makes ``n b^(2(k-v))`` vanish; the floor keeps the tightness
    statistic ``b^(2(v+2)) beta_N^2 (T_max b)^(-(2d+1)q)`` bounded below.
    Without ``beta_n``/``t_max`` the equidistant convention
    ``beta_N = T_max = N`` is used; otherwise the floor solves the general
    inequality with the certified rates.
    """
    if beta_n is None and t_max is None:
        b_low = c_lower * n_points ** (-lower_exponent(d, q, v))
    else:
        beta_n = n_points if beta_n is None else beta_n
        t_max = n_points if t_max is None else t_max
        a = (2.0 * d + 1.0) * q
        b_low = c_lower * (beta_n**2 * t_max ** (-a)) ** (-1.0 / (2.0 * (v + 2) - a))
    b_high = n ** (-1.0 / (2.0 * (k - v)))
    feasible = bool(b_low < b_high)
    growth_exp = 2.0 * (k - v) * lower_exponent(d, q, v)
    growth = f"n = o(N^{growth_exp:.6g})"
    note = f"ceiling from n b^{2 * (k - v)} -> 0"
    window = BandwidthWindow(b_low, b_high, feasible, growth, note)
    if raise_if_empty and not feasible:
        raise InfeasibleWindow(f"b_low={b_low:.6g} >= b_high={b_high:.6g}; requires {growth}")
    return window


def condition_statistics(n: int, b: float, beta_n: float, t_max: float, d: float, q: int, v: int, k: int) -> dict:
    """Finite-sample values of the bandwidth conditions.

    ``tightness`` uses the exponent ``-(2d+1)q``; ``tightness_alt`` uses
    ``(2d-1)q`` as in the variance expansion. Both are reported.
    """
    return {
        "bias_negligible": n * b ** (2 * (k - v)),
        "tightness": b ** (2 * (v + 2)) * beta_n**2 * (t_max * b) ** (-(2 * d + 1) * q),
        "tightness_alt": b ** (2 * (v + 2)) * beta_n**2 * (t_max * b) ** ((2 * d - 1) * q),
        "riemann": b ** (k + 1) * beta_n,
    }
