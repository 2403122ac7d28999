"""Monte Carlo experiment driver and report writer."""

from .config import ExperimentConfig
from .report import emit_report, write_csv
from .studies import (
    Check,
    SlopeFit,
    StudyResult,
    Table,
    empty_result,
    fit_loglog,
    load_thresholds,
    run_bias_study,
    run_clt_study,
    run_lrd_study,
    run_study,
    run_variance_study,
)

__all__ = [
    "Check",
    "ExperimentConfig",
    "SlopeFit",
    "StudyResult",
    "Table",
    "emit_report",
    "empty_result",
    "fit_loglog",
    "load_thresholds",
    "run_bias_study",
    "run_clt_study",
    "run_lrd_study",
    "run_study",
    "run_variance_study",
    "write_csv",
]
