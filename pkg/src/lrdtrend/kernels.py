"""Polynomial kernels of order (v, k) on [-1, 1].

A kernel of order ``(v, k)`` has a ``v``-th derivative whose moments satisfy

    int x^j K^(v)(x) dx = (-1)^v v!   (j = v)
                        = 0           (j < k, j != v)
                        = theta != 0  (j = k).

All kernels here are polynomials on their support, so moments, boundary
values and derivative bounds are computed exactly in rational arithmetic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .errors import CertificationFailure, OrderTooHigh, QuadratureUnstable

NONNEG_GRID = 10_001


# -- exact polynomial helpers (ascending coefficient lists of Fractions) ----


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_pow(p, e):
    out = [Fraction(1)]
    for _ in range(e):
        out = _poly_mul(out, p)
    return out


def _poly_deriv(p, order=1):
    for _ in range(order):
        p = [i * c for i, c in enumerate(p)][1:] or [Fraction(0)]
    return p


def _poly_at(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _integral_pm1(p) -> Fraction:
    """Exact integral over [-1, 1]."""
    return sum((2 * c / (i + 1) for i, c in enumerate(p) if i % 2 == 0), Fraction(0))


@dataclass(frozen=True)
class KernelOfOrder:
    """Polynomial kernel supported on [-1, 1] declared of order ``(v, k)``.

    Parameters
    ----------
    coeffs : tuple of Fraction
        Ascending polynomial coefficients of ``K`` on [-1, 1].
    v, k : int
        Derivative order and moment order.
    strict_nonnegative : bool
        If False, negativity of ``K`` is downgraded to a warning in
        :func:`certify` (needed for ``k > v + 2``).
    """

    coeffs: tuple
    v: int
    k: int
    strict_nonnegative: bool = True
    name: str = "polynomial"
    _float_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        if self.v < 0 or self.k < 1:
            raise ValueError("need v >= 0 and k >= 1")

    def derivative_coeffs(self, order: int):
        return _poly_deriv(list(self.coeffs), order)

    def polynomial(self, order: int = 0) -> Polynomial:
        """Floating-point polynomial for ``K^(order)`` on [-1, 1]."""
        poly = self._float_cache.get(order)
        if poly is None:
            poly = Polynomial([float(c) for c in self.derivative_coeffs(order)])
            self._float_cache[order] = poly
        return poly

    def moment(self, j: int, order: int | None = None) -> Fraction:
        """Exact ``int x^j K^(order)(x) dx`` (``order`` defaults to ``v``)."""
        order = self.v if order is None else order
        p = _poly_mul([Fraction(0)] * j + [Fraction(1)], self.derivative_coeffs(order))
        return _integral_pm1(p)

    @property
    def theta(self) -> Fraction:
        """``k``-th moment of ``K^(v)``."""
        return self.moment(self.k)

    @cached_property
    def kappa(self) -> float:
        """``sup |K^(v+1)|`` over [-1, 1]."""
        return _sup_abs(self.derivative_coeffs(self.v + 1))

    @property
    def lipschitz_l(self) -> float:
        """Lipschitz constant of ``K^(v)`` on [-1, 1] (mean value theorem)."""
        return self.kappa

    def __call__(self, x, order: int = 0):
        return eval_deriv(self, order, x)

    @property
    def description(self) -> dict:
        return {"v": self.v, "k": self.k, "name": self.name}


def _sup_abs(p) -> float:
    """Exact-enough maximum of ``|p|`` on [-1, 1] via critical points."""
    candidates = [Fraction(-1), Fraction(1)]
    dp = _poly_deriv(p)
    if any(dp):
        roots = Polynomial([float(c) for c in dp]).roots()
        candidates += [Fraction(float(r.real)) for r in roots if abs(r.imag) < 1e-12 and -1 <= r.real <= 1]
    return float(max(abs(_poly_at(p, x)) for x in candidates))


def _beta_family(v: int) -> list:
    """Coefficients of ``(1 - x^2)^(v+1)``."""
    return _poly_pow([Fraction(1), Fraction(0), Fraction(-1)], v + 1)


def _solve_exact(mat, rhs):
    """Gauss-Jordan elimination over the rationals."""
    n = len(rhs)
    aug = [list(row) + [r] for row, r in zip(mat, rhs)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        piv = aug[col][col]
        aug[col] = [x / piv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


def build_default_kernel(v: int) -> KernelOfOrder:
    """``c_v (1 - x^2)^(v+1)`` normalised to unit mass, of order ``(v, v + 2)``.

    ``c_0 = 3/4`` (Epanechnikov), ``c_1 = 15/16``, ``c_2 = 35/32``.
    """
    if v not in (0, 1, 2):
        raise ValueError("default kernels exist for v in {0, 1, 2}")
    raw = _beta_family(v)
    mass = _integral_pm1(raw)
    return KernelOfOrder(tuple(c / mass for c in raw), v, v + 2, name=f"beta{v + 1}")


def build_higher_order_kernel(v: int, k: int) -> KernelOfOrder:
    """Kernel of order ``(v, k)`` from ``(1 - x^2)^(v+1) * even polynomial``.

    Solves, exactly, for unit mass and vanishing even moments
    ``2, 4, .., k - v - 2`` of ``K``; integration by parts then gives the
    moment table of ``K^(v)``. ``k - v`` must be even (odd moments of a
    symmetric kernel vanish, so ``theta`` would be zero otherwise). For
    ``k > v + 2`` the kernel is necessarily negative somewhere, and
    non-negativity is relaxed to a warning.
    """
    if k < v + 2 or (k - v) % 2:
        raise ValueError("need k >= v + 2 with k - v even")
    m = (k - v) // 2
    base = _beta_family(v)
    # row r: int x^(2r) * base * x^(2i) dx, unit mass for r = 0 and zero otherwise
    mat = [[_shifted_moment(base, 2 * r + 2 * i) for i in range(m)] for r in range(m)]
    sol = _solve_exact(mat, [Fraction(1)] + [Fraction(0)] * (m - 1))
    coeffs = _poly_mul(base, _even_poly(sol))
    return KernelOfOrder(tuple(coeffs), v, k, strict_nonnegative=(k == v + 2), name=f"beta{v + 1}-order{k}")


def _shifted_moment(p, j) -> Fraction:
    return _integral_pm1([Fraction(0)] * j + list(p))


def _even_poly(a):
    out = [Fraction(0)] * (2 * len(a) - 1)
    for i, c in enumerate(a):
        out[2 * i] = c
    return out


def from_polynomial(coeffs, v: int, k: int, strict_nonnegative: bool = True, name="candidate") -> KernelOfOrder:
    """Wrap an arbitrary polynomial on [-1, 1] for certification."""
    return KernelOfOrder(tuple(Fraction(c) for c in coeffs), v, k, strict_nonnegative, name)


def eval_deriv(kernel: KernelOfOrder, order: int, x):
    """``K^(order)(x)`` for ``order <= v + 1``; zero outside [-1, 1]."""
    if order > kernel.v + 1:
        raise OrderTooHigh(f"order {order} exceeds v + 1 = {kernel.v + 1}")
    if order < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=float)
    vals = np.where(np.abs(x) <= 1.0, kernel.polynomial(order)(x), 0.0)
    return vals if vals.ndim else float(vals)


@dataclass
class CertificationReport:
    """Checklist of kernel assumptions with computed constants."""

    kernel: KernelOfOrder
    items: list
    theta: Fraction
    lipschitz_l: float
    kappa: float
    warnings: list

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.items)

    @property
    def violations(self) -> list[str]:
        return [f"{name}: {detail}" for name, ok, detail in self.items if not ok]

    def rows(self) -> list[dict]:
        return [{"assumption": name, "passed": ok, "detail": detail} for name, ok, detail in self.items]

    def text(self) -> str:
        kern = self.kernel
        lines = [f"kernel {kern.name} of order (v={kern.v}, k={kern.k})"]
        lines += [f"  [{'PASS' if ok else 'FAIL'}] {name}: {detail}" for name, ok, detail in self.items]
        lines.append(f"  theta = {self.theta} ({float(self.theta):.6g})")
        lines.append(f"  Lipschitz L = {self.lipschitz_l:.6g}, kappa_(v+1) = {self.kappa:.6g}")
        lines += [f"  warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def certify(kernel: KernelOfOrder, raise_on_failure: bool = True) -> CertificationReport:
    """Check smoothness, support/mass/sign, Lipschitz, moment table, boundary and derivative bound.

    Raises
    ------
    CertificationFailure
        Listing every violated item, unless ``raise_on_failure`` is False.
    """
    v, k = kernel.v, kernel.k
    items, notes = [], []

    items.append(("K1 smoothness", True, f"polynomial on [-1, 1], hence C^{v + 1}"))

    grid = np.linspace(-1.0, 1.0, NONNEG_GRID)
    min_val = float(kernel.polynomial(0)(grid).min())
    mass = _integral_pm1(list(kernel.coeffs))
    nonneg = min_val >= -1e-14
    if not nonneg and not kernel.strict_nonnegative:
        notes.append(f"K takes negative values (min {min_val:.4g}); non-negativity relaxed for k > v + 2")
        nonneg = True
    items.append(("K2 non-negativity", nonneg, f"min on grid {min_val:.4g}"))
    items.append(("K2 unit mass", mass == 1, f"int K = {mass}"))

    items.append(("K3 Lipschitz", np.isfinite(kernel.lipschitz_l), f"L = {kernel.lipschitz_l:.6g}"))

    bad = []
    if v > k - 2:
        bad.append(f"v={v} > k-2={k - 2}")
    for j in range(k):
        target = Fraction((-1) ** v * math.factorial(v)) if j == v else Fraction(0)
        got = kernel.moment(j)
        if got != target:
            bad.append(f"j={j} moment {got} != {target}")
    theta = kernel.theta
    if theta == 0:
        bad.append(f"j={k} moment theta is zero")
    items.append(("K4 order", not bad, "; ".join(bad) if bad else f"moment table exact, theta = {theta}"))

    boundary = []
    for j in range(v):
        p = kernel.derivative_coeffs(j)
        for x in (-1, 1):
            val = _poly_at(p, Fraction(x))
            if val != 0:
                boundary.append(f"K^({j})({x}) = {val}")
    items.append(("K5 boundary", not boundary, "; ".join(boundary) if boundary else f"K^(j)(+-1) = 0 for j < {v}"))

    items.append(("K6 derivative bound", np.isfinite(kernel.kappa), f"kappa_{v + 1} = {kernel.kappa:.6g}"))

    for note in notes:
        warnings.warn(note, stacklevel=2)
    report = CertificationReport(kernel, items, theta, kernel.lipschitz_l, kernel.kappa, notes)
    if raise_on_failure and not report.passed:
        raise CertificationFailure(report.violations)
    return report


def _autocorrelation(kernel: KernelOfOrder, order: int):
    """``R(u) = int K^(order)(x) K^(order)(x - u) dx`` for ``u`` in [0, 2]."""
    poly = kernel.polynomial(order)
    nodes, weights = np.polynomial.legendre.leggauss(poly.degree() + 2)

    def r(u):
        lo, hi = u - 1.0, 1.0
        x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        return 0.5 * (hi - lo) * np.dot(weights, poly(x) * poly(x - u))

    return r


def double_kernel_integral(kernel: KernelOfOrder, exponent: float, order: int = 0) -> float:
    """``int int K^(order)(x) K^(order)(y) |x - y|^exponent dx dy``.

    The double integral is reduced to ``2 int_0^2 R(u) u^exponent du`` with
    ``R`` the kernel autocorrelation (evaluated exactly by Gauss-Legendre,
    since the integrand is polynomial), and the algebraic singularity at
    ``u = 0`` is handled by QUADPACK's weighted rule.

    Raises
    ------
    QuadratureUnstable
        If QUADPACK reports an error estimate above ``1e-6`` relative to
        the integral of ``|R(u)| u^exponent``.
    """
    if not -1.0 < exponent <= 0.0:
        raise ValueError("exponent must lie in (-1, 0]")
    r = _autocorrelation(kernel, order)
    weight = {"weight": "alg", "wvar": (exponent, 0.0), "limit": 200}
    # magnitude of the integrand, so that integrals that cancel to zero are judged fairly
    scale = 2.0 * integrate.quad(lambda u: abs(r(u)), 0.0, 2.0, epsrel=1e-6, **weight)[0]
    value, err = integrate.quad(r, 0.0, 2.0, epsabs=1e-14 * scale, epsrel=1e-12, **weight)
    value *= 2.0
    if not np.isfinite(value) or 2.0 * err > 1e-6 * max(abs(value), scale):
        raise QuadratureUnstable(f"double kernel integral did not converge (estimate {value}, error {err})")
    return float(value)
