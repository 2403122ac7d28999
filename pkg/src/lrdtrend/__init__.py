"""Trend and derivative estimation for functional data with long-memory errors.

The package simulates panels ``Y_ij = mu(t_ij) + X_i(t_ij) + G(Z_i(T_ij), t_ij)``
with fractional Gaussian noise ``Z_i``, estimates ``mu^(v)`` with a
Priestley-Chao kernel smoother and provides the matching asymptotic
constants and Monte Carlo studies.
"""

from .design import SamplingDesign, check_design, make_equidistant, make_jittered, make_poisson
from .errors import (
    BandwidthTooLarge,
    BandwidthTooSmall,
    CertificationFailure,
    ConfigError,
    DegenerateCell,
    DegenerateLimit,
    EmbeddingFailure,
    IndexOutOfRange,
    InfeasibleWindow,
    LrdTrendError,
    NotPositiveDefinite,
    OrderTooHigh,
    QuadratureUnstable,
)
from .estimator import EstimateCurve, default_grid, pc_weights, priestley_chao, sum_of_weights
from .fda import FunctionalModel, Panel, Sine, default_model, generate_panel, mean_panel
from .hermite import (
    SubordinationMap,
    asymptotic_error_covariance,
    hermite_coefficients,
    hermite_rank,
    long_memory_inherited,
    make_transform,
    subordinate,
)
from .kernels import KernelOfOrder, build_default_kernel, build_higher_order_kernel, certify, double_kernel_integral
from .lrd import GaussianPath, LrdGaussianModel, autocovariance, simulate_path, simulate_path_oracle, simulate_paths
from .theory import TheoryConstants, bandwidth_window, theory_bias, theory_variance

__version__ = "0.1.0"

__all__ = [
    "BandwidthTooLarge",
    "BandwidthTooSmall",
    "CertificationFailure",
    "ConfigError",
    "DegenerateCell",
    "DegenerateLimit",
    "EmbeddingFailure",
    "EstimateCurve",
    "FunctionalModel",
    "GaussianPath",
    "IndexOutOfRange",
    "InfeasibleWindow",
    "KernelOfOrder",
    "LrdGaussianModel",
    "LrdTrendError",
    "NotPositiveDefinite",
    "OrderTooHigh",
    "Panel",
    "QuadratureUnstable",
    "SamplingDesign",
    "Sine",
    "SubordinationMap",
    "TheoryConstants",
    "asymptotic_error_covariance",
    "autocovariance",
    "bandwidth_window",
    "build_default_kernel",
    "build_higher_order_kernel",
    "certify",
    "check_design",
    "default_grid",
    "default_model",
    "double_kernel_integral",
    "generate_panel",
    "hermite_coefficients",
    "hermite_rank",
    "long_memory_inherited",
    "make_equidistant",
    "make_jittered",
    "make_poisson",
    "make_transform",
    "mean_panel",
    "pc_weights",
    "priestley_chao",
    "simulate_path",
    "simulate_path_oracle",
    "simulate_paths",
    "subordinate",
    "sum_of_weights",
    "theory_bias",
    "theory_variance",
]
