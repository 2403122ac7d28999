"""Functional data model: trend, Karhunen-Loeve basis, and observed panels.

Subject ``i`` is observed as

    Y_ij = mu(t_ij) + sum_l xi_il phi_l(t_ij) + G(Z_i(T_ij), t_ij)

with scores ``xi_il ~ (0, lambda_l)`` independent of the latent paths ``Z_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import SamplingDesign
from .hermite import SubordinationMap
from .lrd import LrdGaussianModel, simulate_paths
from .seeding import NOISE, SCORES, derive_seed, make_rng

ORTHONORMAL_TOL = 1e-6


# ---------------------------------------------------------------------------
# smooth closed-form functions with derivatives of every order
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sine:
    """``amplitude * sin(2 pi frequency t + phase)``."""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0

    def __call__(self, t, order: int = 0):
        w = 2.0 * math.pi * self.frequency
        t = np.asarray(t, dtype=float)
        return self.amplitude * w**order * np.sin(w * t + self.phase + order * math.pi / 2)

    @property
    def description(self) -> dict:
        return {"name": "sine", "amplitude": self.amplitude, "frequency": self.frequency, "phase": self.phase}


@dataclass(frozen=True)
class PolynomialTrend:
    """Polynomial with ascending coefficients."""

    coeffs: tuple = (0.0, 1.0)

    def __call__(self, t, order: int = 0):
        poly = np.polynomial.Polynomial(self.coeffs).deriv(order) if order else np.polynomial.Polynomial(self.coeffs)
        return poly(np.asarray(t, dtype=float))

    @property
    def description(self) -> dict:
        return {"name": "polynomial", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class CosineBasis:
    """``sqrt(2) cos(l pi t)``, orthonormal on [0, 1] for ``l >= 1``."""

    index: int

    def __call__(self, t, order: int = 0):
        w = self.index * math.pi
        t = np.asarray(t, dtype=float)
        return math.sqrt(2.0) * w**order * np.cos(w * t + order * math.pi / 2)


@dataclass(frozen=True)
class SineBasis:
    """``sqrt(2) sin(2 pi l t)``, orthonormal on [0, 1] for ``l >= 1``."""

    index: int

    def __call__(self, t, order: int = 0):
        w = 2.0 * self.index * math.pi
        t = np.asarray(t, dtype=float)
        return math.sqrt(2.0) * w**order * np.sin(w * t + order * math.pi / 2)


TRENDS = {"sine": Sine, "polynomial": PolynomialTrend}
BASES = {"cosine": CosineBasis, "sine": SineBasis}


def make_trend(name: str, **params):
    try:
        cls = TRENDS[name]
    except KeyError:
        raise ValueError(f"unknown trend {name!r}; choose from {sorted(TRENDS)}") from None
    if "coeffs" in params:
        params["coeffs"] = tuple(params["coeffs"])
    return cls(**params)


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionalModel:
    """Trend plus a finite Karhunen-Loeve basis.

    ``tail`` holds further ``(lambda_l, phi_l)`` pairs that are not simulated;
    they only feed the truncation-error bound of the theory constants.
    """

    trend: object
    eigenvalues: tuple
    eigenfunctions: tuple
    score_law: str = "gaussian"
    tail: tuple = ()
    description: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.eigenfunctions):
            raise ValueError("eigenvalues and eigenfunctions must have equal length")
        if any(lam < 0 for lam in self.eigenvalues):
            raise ValueError("eigenvalues must be non-negative")
        if self.score_law not in ("gaussian", "uniform"):
            raise ValueError("score_law must be 'gaussian' or 'uniform'")

    @property
    def n_basis(self) -> int:
        return len(self.eigenvalues)

    def gram_matrix(self, nodes: int = 200) -> np.ndarray:
        """Gauss-Legendre Gram matrix of the basis on [0, 1]."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        x, w = 0.5 * (x + 1.0), 0.5 * w
        vals = np.array([phi(x) for phi in self.eigenfunctions]).reshape(self.n_basis, -1)
        return (vals * w) @ vals.T

    def check_orthonormal(self, tol: float = ORTHONORMAL_TOL) -> bool:
        if self.n_basis == 0:
            return True
        return bool(np.max(np.abs(self.gram_matrix() - np.eye(self.n_basis))) <= tol)

    def basis_values(self, t, order: int = 0) -> np.ndarray:
        """Array ``(L, *t.shape)`` of ``phi_l^(order)(t)``."""
        t = np.asarray(t, dtype=float)
        if self.n_basis == 0:
            return np.zeros((0,) + t.shape)
        return np.array([phi(t, order) for phi in self.eigenfunctions])

    def covariance(self, s, t, order: int = 0):
        """``sum_l lambda_l phi_l^(order)(s) phi_l^(order)(t)``."""
        lam = np.asarray(self.eigenvalues, dtype=float)
        return np.tensordot(lam, self.basis_values(s, order) * self.basis_values(t, order), axes=1)

    def draw_scores(self, rng, n: int) -> np.ndarray:
        """Scores of shape ``(n, L)`` with variances ``lambda_l``."""
        lam = np.asarray(self.eigenvalues, dtype=float)
        if self.score_law == "gaussian":
            return rng.standard_normal((n, self.n_basis)) * np.sqrt(lam)
        half_width = np.sqrt(3.0 * lam)
        return rng.uniform(-1.0, 1.0, (n, self.n_basis)) * half_width

    def with_eigenvalues(self, eigenvalues) -> FunctionalModel:
        return FunctionalModel(self.trend, tuple(eigenvalues), self.eigenfunctions, self.score_law, self.tail, self.description)


def default_model(n_basis: int = 3, trend=None, decay: float = 2.0, tail_terms: int = 200, score_law="gaussian") -> FunctionalModel:
    """``mu = sin(2 pi t)``, ``phi_l = sqrt(2) cos(l pi t)``, ``lambda_l = l^-decay``."""
    trend = Sine() if trend is None else trend
    lam = tuple(float(l) ** -decay for l in range(1, n_basis + 1))
    phis = tuple(CosineBasis(l) for l in range(1, n_basis + 1))
    tail = tuple((float(l) ** -decay, CosineBasis(l)) for l in range(n_basis + 1, n_basis + tail_terms + 1))
    description = {"trend": getattr(trend, "description", {}), "basis": "cosine", "n_basis": n_basis, "decay": decay, "score_law": score_law}
    return FunctionalModel(trend, lam, phis, score_law, tail, description)


def evaluate_curve(model: FunctionalModel, scores, t):
    """``mu(t) + sum_l xi_l phi_l(t)``."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (model.n_basis,):
        raise ValueError(f"expected {model.n_basis} scores, got shape {scores.shape}")
    return model.trend(t) + np.tensordot(scores, model.basis_values(t), axes=1)


# ---------------------------------------------------------------------------
# panels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Panel:
    """Observed values aligned with the flat layout of ``design``."""

    design: SamplingDesign
    values: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.shape != self.design.times.shape:
            raise ValueError("panel values must match the design layout")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def subject_values(self, i: int) -> np.ndarray:
        o = self.design.offsets
        return self.values[o[i] : o[i + 1]]

    def __add__(self, other: Panel) -> Panel:
        return Panel(self.design, self.values + other.values)

    def __mul__(self, scalar: float) -> Panel:
        return Panel(self.design, self.values * scalar)

    __rmul__ = __mul__


def _description_of(obj):
    return getattr(obj, "description", None) or {"repr": repr(obj)}


def generate_panel(
    model: FunctionalModel,
    design: SamplingDesign,
    lrd: LrdGaussianModel | None,
    smap: SubordinationMap | None,
    seed: int = 0,
    replicate: int = 0,
    include_scores: bool = True,
    cell: int = 0,
) -> Panel:
    """Simulate one panel.

    Scores come from the stream ``(SCORES, cell, replicate)``; subject ``i``'s
    latent path from ``(NOISE, cell, replicate, i)``, so the two sources are
    independent and every subject has its own path. ``smap=None`` switches the errors
    off; ``include_scores=False`` drops the random-curve term.
    """
    t = design.t
    subj = design.subject
    uniq, inverse = design.unique_t
    values = model.trend(uniq)[inverse]
    if include_scores and model.n_basis:
        scores = model.draw_scores(make_rng(derive_seed(seed, SCORES, cell, replicate)), design.n)
        basis = model.basis_values(uniq)[:, inverse]
        values = values + np.einsum("ml,lm->m", scores[subj], basis)
    if smap is not None:
        if lrd is None:
            raise ValueError("an LRD model is required when errors are switched on")
        paths = simulate_paths(lrd, design.t_max, [derive_seed(seed, NOISE, cell, replicate, i) for i in range(design.n)])
        values = values + smap(paths[subj, design.times - 1], t)
    provenance = {
        "model": model.description or _description_of(model),
        "lrd": _description_of(lrd) if lrd is not None else None,
        "subordination": _description_of(smap) if smap is not None else None,
        "design": _description_of(design),
        "seed": int(seed),
        "replicate": int(replicate),
        "cell": int(cell),
        "include_scores": include_scores,
    }
    return Panel(design, values, provenance)


def mean_panel(model: FunctionalModel, design: SamplingDesign) -> Panel:
    """Noise-free panel ``Y_ij = mu(t_ij)``, the expectation of any simulated panel."""
    return Panel(design, model.trend(design.t), {"model": model.description or _description_of(model), "design": _description_of(design), "noise": "off"})
