"""Monte Carlo studies of bias rate, variance rate, long-memory term and CLT.

Every study validates its configuration first, computes the theory columns
once, then runs replicates with seeds derived from ``(cell, replicate,
subject)``. Aggregates use exactly rounded sums, so they do not depend on the
order in which replicates finish.
"""

from __future__ import annotations

import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy import stats

from ..design import make_equidistant
from ..errors import ConfigError, DegenerateLimit, InfeasibleWindow
from ..estimator import boundary_mask, pc_weights
from ..fda import generate_panel, mean_panel
from ..theory import (
    TheoryConstants,
    bandwidth_window,
    condition_statistics,
    finite_sample_variance,
    lrd_variance_term,
    theory_bias,
)
from .config import ExperimentConfig, probes_array

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEGENERATE_VAR = 1e-14


def load_thresholds(path=None) -> dict:
    """Acceptance thresholds; the packaged file unless ``path`` is given."""
    if path is None:
        text = resources.files("lrdtrend").joinpath("acceptance.toml").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return tomllib.loads(text)


def _keyed(table: dict, key) -> float:
    return float(table.get(str(key), table["default"]))


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass
class Table:
    """Rows sharing one column schema; ``keys`` identify a cell."""

    columns: list
    rows: list = field(default_factory=list)
    keys: tuple = ()

    def column(self, name) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)


@dataclass
class SlopeFit:
    """OLS fit of ``log y`` on ``log x`` with residual diagnostics."""

    label: str
    x: list
    y: list
    slope: float
    stderr: float
    intercept: float
    ci_low: float
    ci_high: float
    r_squared: float
    residuals: list

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals else float("nan")


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class StudyResult:
    kind: str
    tables: dict = field(default_factory=dict)
    slopes: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def main(self) -> Table:
        return self.tables[self.kind]


SCHEMAS = {
    "bias": (("b", "t", "replicates", "mean_bias", "se", "theory_bias", "ratio", "slope_fit"), ("b", "t")),
    "variance": (("n", "t", "replicates", "variance", "se", "n_var", "c_var", "ratio", "lrd_term"), ("n", "t")),
    "lrd": (("t_max", "t", "replicates", "variance", "n_var", "se", "theory", "ratio", "exact"), ("t_max", "t")),
    "clt": (("t", "replicates", "mean_z", "var_z", "ks_stat", "ks_pvalue", "c_var"), ("t",)),
    "clt_cov": (("s", "t", "replicates", "cov", "se", "theory_cov", "z_score"), ("s", "t")),
}


def _new_table(name: str) -> Table:
    columns, keys = SCHEMAS[name]
    return Table(list(columns), [], keys)


def empty_result(kind: str) -> StudyResult:
    """A result with the schema of ``kind`` and no rows."""
    names = [name for name in SCHEMAS if name == kind or name.startswith(kind + "_")]
    return StudyResult(kind, {name: _new_table(name) for name in names})


def fit_loglog(label: str, x, y) -> SlopeFit:
    """Least-squares slope of ``log|y|`` against ``log x`` with a 95% interval."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.abs(np.asarray(y, dtype=float)))
    if lx.size < 2 or not np.all(np.isfinite(ly)):
        nan = float("nan")
        return SlopeFit(label, list(map(float, x)), list(map(float, y)), nan, nan, nan, nan, nan, nan, [])
    fit = stats.linregress(lx, ly)
    dof = lx.size - 2
    half = stats.t.ppf(0.975, dof) * fit.stderr if dof > 0 else 0.0
    resid = ly - (fit.intercept + fit.slope * lx)
    return SlopeFit(
        label,
        [float(v) for v in x],
        [float(v) for v in y],
        float(fit.slope),
        float(fit.stderr),
        float(fit.intercept),
        float(fit.slope - half),
        float(fit.slope + half),
        float(fit.rvalue**2),
        [float(r) for r in resid],
    )


def _tolerance_check(name, value, target, tol, detail="") -> Check:
    passed = bool(np.isfinite(value) and abs(value - target) <= tol)
    return Check(name, float(value), float(target), float(tol), passed, detail)


# ---------------------------------------------------------------------------
# replicate machinery
# ---------------------------------------------------------------------------


def _run_replicates(fn, replicates: int, workers: int = 1) -> np.ndarray:
    """Stack ``fn(r)`` for ``r = 0..R-1``; results are indexed by replicate."""
    if workers <= 1:
        return np.array([fn(r) for r in range(replicates)])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, range(replicates))))


def _mean(x: np.ndarray) -> np.ndarray:
    """Column means with exactly rounded sums (order independent)."""
    return np.array([math.fsum(col) for col in np.atleast_2d(x.T)]) / x.shape[0]


def _var(x: np.ndarray) -> np.ndarray:
    centred = x - _mean(x)
    return np.array([math.fsum(col) for col in np.atleast_2d((centred**2).T)]) / (x.shape[0] - 1)


def _cross(x: np.ndarray, a: int, c: int) -> tuple[float, float]:
    """Sample covariance of columns ``a`` and ``c`` and its Monte Carlo SE."""
    centred = x - _mean(x)
    prod = centred[:, a] * centred[:, c]
    r = x.shape[0]
    cov = math.fsum(prod) / (r - 1)
    spread = math.fsum((prod - cov) ** 2) / (r - 1)
    return cov, math.sqrt(spread / r)


def _check_probes(probes, bandwidths):
    for b in bandwidths:
        masked = probes[boundary_mask(probes, b)]
        if masked.size:
            raise ConfigError(f"probe points {masked.tolist()} are within b={b} of the boundary")


def _study_meta(config: ExperimentConfig, built: dict) -> dict:
    return {
        "kind": config.kind,
        "master_seed": int(config.study["master_seed"]),
        "replicates": int(config.study["replicates"]),
        "kernel": built["kernel"].description,
        "q": built.get("q"),
        "config": config.to_dict(),
    }


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------


def run_bias_study(config: ExperimentConfig, thresholds: dict | None = None) -> StudyResult:
    """Mean bias of the derivative estimator over a bandwidth grid.

    With ``study.noise`` off a single deterministic replicate is used; with it
    on, every replicate panel is reused across all bandwidths.
    """
    th = (thresholds or load_thresholds())["bias"]
    built = config.validate()
    model, kernel, design = built["model"], built["kernel"], built["design"]
    v, k = kernel.v, kernel.k
    probes = probes_array(config)
    bandwidths = sorted(float(b) for b in config.study["bandwidths"])
    _check_probes(probes, bandwidths)
    noise = bool(config.study["noise"])
    replicates = int(config.study["replicates"]) if noise else 1
    seed = int(config.study["master_seed"])

    weights = [pc_weights(design, kernel, b, probes) for b in bandwidths]
    truth = model.trend(probes, v)
    theory = np.array([theory_bias(model, kernel, probes, b) for b in bandwidths])  # (B, P)

    if noise:
        lrd, smap = built["lrd"], built["subordination"]

        def replicate(r):
            y = generate_panel(model, design, lrd, smap, seed=seed, replicate=r).values
            return np.concatenate([w @ y for w in weights]) - np.tile(truth, len(bandwidths))

        errs = _run_replicates(replicate, replicates, int(config.study["workers"]))
        mean_bias = _mean(errs).reshape(len(bandwidths), -1)
        se = np.sqrt(_var(errs) / replicates).reshape(len(bandwidths), -1)
    else:
        y = mean_panel(model, design).values
        mean_bias = np.array([w @ y - truth for w in weights])
        se = np.zeros_like(mean_bias)

    result = StudyResult("bias", meta=_study_meta(config, built))
    result.meta.update({"noise": noise, "replicates": replicates, "v": v, "k": k, "target_slope": k - v})
    slope_tol = _keyed(th["slope_tol"], v)
    c_bias = TheoryConstants(model, kernel).c_bias(probes)
    for p, t in enumerate(probes):
        label = f"t={t:.6g}"
        fit = fit_loglog(label, bandwidths, mean_bias[:, p])
        result.slopes.append(fit)
        if abs(c_bias[p]) < 1e-12:
            worst = float(np.max(np.abs(mean_bias[:, p])))
            result.checks.append(
                Check(f"bias floor at {label}", worst, 0.0, th["floor_tol"], worst <= th["floor_tol"], "leading constant vanishes")
            )
            continue
        result.checks.append(_tolerance_check(f"bias slope at {label}", fit.slope, k - v, slope_tol))
        if v in th["ratio_orders"]:
            ratio = mean_bias[0, p] / theory[0, p]
            result.checks.append(
                _tolerance_check(f"bias ratio at {label}, b={bandwidths[0]:.6g}", ratio, 1.0, th["ratio_tol"])
            )

    table = _new_table("bias")
    for i, b in enumerate(bandwidths):
        for p, t in enumerate(probes):
            ratio = mean_bias[i, p] / theory[i, p] if theory[i, p] != 0 else float("nan")
            table.rows.append(
                {
                    "b": b,
                    "t": float(t),
                    "replicates": replicates,
                    "mean_bias": float(mean_bias[i, p]),
                    "se": float(se[i, p]),
                    "theory_bias": float(theory[i, p]),
                    "ratio": float(ratio),
                    "slope_fit": result.slopes[p].slope,
                }
            )
    result.tables["bias"] = table
    return result


def run_variance_study(config: ExperimentConfig, thresholds: dict | None = None) -> StudyResult:
    """Empirical variance against the number of curves at a fixed bandwidth."""
    th = (thresholds or load_thresholds())["variance"]
    built = config.validate()
    model, kernel, lrd, smap = built["model"], built["kernel"], built["lrd"], built["subordination"]
    study = config.study
    replicates = int(study["replicates"])
    if replicates < th["min_replicates"]:
        raise ConfigError(f"variance study needs at least {th['min_replicates']} replicates, got {replicates}")
    n_values = sorted(int(n) for n in study["n_values"])
    if len(n_values) < 2:
        raise ConfigError("study.n_values needs at least two entries")
    b = float(study["bandwidths"][0])
    probes = probes_array(config)
    _check_probes(probes, [b])
    seed = int(study["master_seed"])
    const = TheoryConstants(model, kernel, lrd, smap, built.get("q") or None)
    c_var = const.c_var(probes)
    truth = model.trend(probes, kernel.v)

    variance = np.empty((len(n_values), probes.size))
    for cell, n in enumerate(n_values):
        design = config.build_design(n=n)
        w = pc_weights(design, kernel, b, probes)

        def replicate(r, design=design, w=w, cell=cell):
            return w @ generate_panel(model, design, lrd, smap, seed=seed, replicate=r, cell=cell).values - truth

        variance[cell] = _var(_run_replicates(replicate, replicates, int(study["workers"])))

    t_max = config.build_design(n=1).t_max
    result = StudyResult("variance", meta=_study_meta(config, built))
    result.meta.update({"b": b, "target_slope": th["slope_target"]})
    table = _new_table("variance")
    for cell, n in enumerate(n_values):
        lrd_term = n * np.asarray(lrd_variance_term(const, n, b, t_max, probes)) if const.q else np.zeros_like(probes)
        for p, t in enumerate(probes):
            var = variance[cell, p]
            table.rows.append(
                {
                    "n": n,
                    "t": float(t),
                    "replicates": replicates,
                    "variance": float(var),
                    "se": float(var * math.sqrt(2.0 / (replicates - 1))),
                    "n_var": float(n * var),
                    "c_var": float(c_var[p]),
                    "ratio": float(n * var / c_var[p]) if c_var[p] > 0 else float("nan"),
                    "lrd_term": float(lrd_term[p]),
                }
            )
    result.tables["variance"] = table
    for p, t in enumerate(probes):
        label = f"t={t:.6g}"
        fit = fit_loglog(label, n_values, variance[:, p])
        result.slopes.append(fit)
        result.checks.append(_tolerance_check(f"variance slope at {label}", fit.slope, th["slope_target"], th["slope_tol"]))
        ratio = n_values[-1] * variance[-1, p] / c_var[p] if c_var[p] > 0 else float("nan")
        result.checks.append(_tolerance_check(f"n var / C_var at {label}, n={n_values[-1]}", ratio, 1.0, th["ratio_tol"]))
    return result


def run_lrd_study(config: ExperimentConfig, thresholds: dict | None = None) -> StudyResult:
    """Pure-noise runs (no random curves) over increasing durations ``T_max``.

    The design generator is equidistant with ``N = T_max``. The scaled
    variance ``n var`` is compared with ``b^(-2v) (T_max b)^((2d-1)q) I_q(t)``
    and with the exact finite-sample variance of the estimator.
    """
    th = (thresholds or load_thresholds())["lrd"]
    built = config.validate()
    model, kernel, lrd, smap = built["model"], built["kernel"], built["lrd"], built["subordination"]
    q = built.get("q")
    if not q:
        raise DegenerateLimit("the error transform is zero; there is no long-memory term")
    study = config.study
    replicates = int(study["replicates"])
    t_values = sorted(int(t) for t in study["t_max_values"])
    if len(t_values) < 2:
        raise ConfigError("study.t_max_values needs at least two entries")
    n = int(config.design["n"])
    b = float(study["bandwidths"][0])
    probes = probes_array(config)
    _check_probes(probes, [b])
    seed = int(study["master_seed"])
    const = TheoryConstants(model, kernel, lrd, smap, q)
    truth = model.trend(probes, kernel.v)

    result = StudyResult("lrd", meta=_study_meta(config, built))
    target = (2.0 * lrd.d - 1.0) * q
    result.meta.update({"b": b, "n": n, "eigenvalues": 0.0, "target_slope": target})
    table = _new_table("lrd")
    n_var = np.empty((len(t_values), probes.size))
    for cell, t_max in enumerate(t_values):
        design = make_equidistant(n, t_max)
        w = pc_weights(design, kernel, b, probes)

        def replicate(r, design=design, w=w, cell=cell):
            y = generate_panel(model, design, lrd, smap, seed=seed, replicate=r, cell=cell, include_scores=False).values
            return w @ y - truth

        var = _var(_run_replicates(replicate, replicates, int(study["workers"])))
        n_var[cell] = n * var
        theory = n * np.asarray(lrd_variance_term(const, n, b, t_max, probes))
        single = make_equidistant(1, t_max)
        for p, t in enumerate(probes):
            exact = finite_sample_variance(single, kernel, b, float(t), model, lrd, smap)[1]
            level = n_var[cell, p] / theory[p]
            table.rows.append(
                {
                    "t_max": t_max,
                    "t": float(t),
                    "replicates": replicates,
                    "variance": float(var[p]),
                    "n_var": float(n_var[cell, p]),
                    "se": float(n_var[cell, p] * math.sqrt(2.0 / (replicates - 1))),
                    "theory": float(theory[p]),
                    "ratio": float(level),
                    "exact": float(exact),
                }
            )
            result.checks.append(
                _tolerance_check(f"level at t={t:.6g}, T_max={t_max}", level, 1.0, th["level_tol"])
            )
    result.tables["lrd"] = table
    slope_tol = _keyed(th["slope_tol"], q)
    for p, t in enumerate(probes):
        label = f"t={t:.6g}"
        fit = fit_loglog(label, t_values, n_var[:, p])
        result.slopes.append(fit)
        result.checks.insert(p, _tolerance_check(f"n var slope in T_max at {label}", fit.slope, target, slope_tol))
    return result


def run_clt_study(config: ExperimentConfig, thresholds: dict | None = None) -> StudyResult:
    """Standardised estimation errors against the Gaussian limit.

    Raises
    ------
    InfeasibleWindow
        If the admissible bandwidth window is empty.
    ConfigError
        If the configured bandwidth lies outside a non-empty window.
    DegenerateLimit
        If the limit variance vanishes at some probe point.
    """
    th = (thresholds or load_thresholds())["clt"]
    built = config.validate()
    model, kernel, lrd, smap, design = (built[s] for s in ("model", "kernel", "lrd", "subordination", "design"))
    q = built.get("q") or 1
    study = config.study
    replicates = int(study["replicates"])
    b = float(study["bandwidths"][0])
    probes = probes_array(config)
    _check_probes(probes, [b])
    v, k = kernel.v, kernel.k
    window = bandwidth_window(
        design.n, design.n_min, lrd.d, q, v, k, float(study["c_lower"]), beta_n=design.beta_n, t_max=design.t_max
    )
    conditions = condition_statistics(design.n, b, design.beta_n, design.t_max, lrd.d, q, v, k)
    window_text = f"window [{window.b_low:.6g}, {window.b_high:.6g}), {window.growth_condition}"
    if not window.feasible:
        raise InfeasibleWindow(f"no admissible bandwidth: {window_text}")
    if not window.contains(b):
        raise ConfigError(f"b={b} outside admissible {window_text}")
    const = TheoryConstants(model, kernel, lrd, smap, built.get("q") or None)
    c_var = const.c_var(probes)
    if np.any(c_var <= DEGENERATE_VAR):
        bad = probes[c_var <= DEGENERATE_VAR].tolist()
        raise DegenerateLimit(f"limit variance is zero at t={bad}")

    truth = model.trend(probes, v)
    w = pc_weights(design, kernel, b, probes)
    seed = int(study["master_seed"])
    root_n = math.sqrt(design.n)

    def replicate(r):
        return root_n * (w @ generate_panel(model, design, lrd, smap, seed=seed, replicate=r).values - truth)

    errs = _run_replicates(replicate, replicates, int(study["workers"]))
    z = errs / np.sqrt(c_var)

    result = StudyResult("clt", meta=_study_meta(config, built))
    result.meta.update({"b": b, "window": [window.b_low, window.b_high], "growth_condition": window.growth_condition, **conditions})
    table = _new_table("clt")
    mean_z, var_z = _mean(z), _var(z)
    for p, t in enumerate(probes):
        ks = stats.kstest(z[:, p], "norm")
        table.rows.append(
            {
                "t": float(t),
                "replicates": replicates,
                "mean_z": float(mean_z[p]),
                "var_z": float(var_z[p]),
                "ks_stat": float(ks.statistic),
                "ks_pvalue": float(ks.pvalue),
                "c_var": float(c_var[p]),
            }
        )
        result.checks.append(
            Check(f"KS p-value at t={t:.6g}", float(ks.pvalue), th["ks_pvalue_min"], 0.0, bool(ks.pvalue > th["ks_pvalue_min"]))
        )
    cov_table = _new_table("clt_cov")
    for a, c in itertools.combinations(range(probes.size), 2):
        cov, se = _cross(errs, a, c)
        theory = float(const.c_cov(probes[a], probes[c]))
        cov_table.rows.append(
            {
                "s": float(probes[a]),
                "t": float(probes[c]),
                "replicates": replicates,
                "cov": cov,
                "se": se,
                "theory_cov": theory,
                "z_score": (cov - theory) / se if se > 0 else float("nan"),
            }
        )
        result.checks.append(
            _tolerance_check(
                f"covariance at (s, t)=({probes[a]:.6g}, {probes[c]:.6g})", cov, theory, th["cov_se_mult"] * se
            )
        )
    result.tables["clt"] = table
    result.tables["clt_cov"] = cov_table
    return result


STUDIES = {
    "bias": run_bias_study,
    "variance": run_variance_study,
    "lrd": run_lrd_study,
    "clt": run_clt_study,
}


def run_study(config: ExperimentConfig, thresholds: dict | None = None) -> StudyResult:
    try:
        runner = STUDIES[config.kind]
    except KeyError:
        raise ConfigError(f"unknown study kind {config.kind!r}; choose from {sorted(STUDIES)}") from None
    return runner(config, thresholds)
