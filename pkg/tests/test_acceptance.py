"""Acceptance gate: each criterion records one PASS/FAIL line and asserts it."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import linalg, stats

from conftest import ACCEPTANCE_LINES
from lrdtrend.harness import ExperimentConfig, emit_report, load_thresholds, run_study
from lrdtrend.hermite import exponential_marginal, hermite2, hermite_coefficients, hermite_rank, identity, linear_combination
from lrdtrend.kernels import build_default_kernel, certify
from lrdtrend.lrd import LrdGaussianModel, autocovariance, simulate_path_oracle, simulate_paths
from lrdtrend.seeding import PATH, derive_seed
from lrdtrend.theory import bandwidth_window

TH = load_thresholds()
SINE_45 = {"name": "sine", "phase": math.pi / 4}
PROBES = [0.3, 0.5, 0.7]


def record(number, name, passed, detail, seconds, limit=None):
    timing = f"{seconds:.2f}s" + (f" (limit {limit:g}s)" if limit is not None else "")
    ok = passed and (limit is None or seconds < limit)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {name}: {detail}; {timing}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def study_lines(result):
    return "; ".join(f"{c.name} = {c.value:.4g}" for c in result.checks if not c.passed) or "all checks pass"


class TestAcceptance:
    def test_1_kernel_certification(self):
        tol = TH["kernel"]["moment_tol"]
        start = time.perf_counter()
        problems = []
        for v in (0, 1, 2):
            kernel = build_default_kernel(v)
            report = certify(kernel, raise_on_failure=False)
            if not report.passed:
                problems += report.violations
            for j in range(v + 2):
                target = (-1) ** v * math.factorial(v) if j == v else 0
                if abs(float(kernel.moment(j)) - target) > tol:
                    problems.append(f"v={v} moment {j}")
            if kernel.theta == Fraction(0):
                problems.append(f"v={v} theta is zero")
        seconds = time.perf_counter() - start
        record(1, "kernel certification", not problems, "; ".join(problems) or "v=0,1,2 certified", seconds, TH["kernel"]["max_seconds"])

    def test_2_lrd_simulator(self):
        th = TH["lrd_simulator"]
        model = LrdGaussianModel(0.3)
        m, reps = th["length"], th["replicates"]
        start = time.perf_counter()
        emb = simulate_paths(model, m, [derive_seed(0, PATH, 0, r) for r in range(reps)])
        ora = np.array([simulate_path_oracle(model, m, derive_seed(0, PATH, 1, r)).values for r in range(reps)])
        true = linalg.toeplitz(autocovariance(model, np.arange(m)))
        se = np.sqrt((np.outer(np.diag(true), np.diag(true)) + true**2) / reps)
        upper = np.triu_indices(m)
        counts = {}
        for name, paths in (("embedding", emb), ("oracle", ora)):
            z = np.abs(np.cov(paths, rowvar=False) - true) / se
            counts[name] = int(np.sum(z[upper] > th["cov_se_mult"]))
        lengths = th["partial_sum_lengths"]
        means = [
            simulate_paths(model, n, [derive_seed(0, PATH, 2, i, r) for r in range(2000)]).mean(axis=1)
            for i, n in enumerate(lengths)
        ]
        slope = stats.linregress(np.log(lengths), np.log([np.var(x, ddof=1) for x in means])).slope
        seconds = time.perf_counter() - start
        slope_ok = abs(slope - (2 * 0.3 - 1)) <= th["partial_sum_slope_tol"]
        cov_ok = all(c == 0 for c in counts.values())
        detail = (
            f"entries beyond {th['cov_se_mult']:g} SE of {upper[0].size}: embedding {counts['embedding']},"
            f" oracle {counts['oracle']} (nominal rate gives {upper[0].size * 2 * stats.norm.sf(3):.1f} each);"
            f" partial-sum slope {slope:.3f} vs -0.4"
        )
        record(2, "LRD simulator", cov_ok and slope_ok, detail, seconds, th["max_seconds"])

    def test_3_hermite(self):
        th = TH["hermite"]
        tol = th["coef_tol"]
        start = time.perf_counter()
        problems = []
        for t in (0.2, 0.5, 0.9):
            c = hermite_coefficients(identity(), t).coeffs
            if abs(c[1] - 1) > tol:
                problems.append(f"identity c_1 at t={t}")
            c = hermite_coefficients(hermite2(), t).coeffs
            if abs(c[2] - 2) > tol or abs(c[1]) > tol:
                problems.append(f"H_2 c_2 at t={t}")
            mixed = linear_combination([0.5, 1.0], [1.0, -0.5])
            c = hermite_coefficients(mixed, t).coeffs
            if abs(c[1] - (0.5 + t)) > tol or abs(c[2] - 2 * (1 - 0.5 * t)) > tol:
                problems.append(f"mixed at t={t}")
            expo = exponential_marginal()
            hc = hermite_coefficients(expo, t)
            if abs(hc.variance() - expo.second_moment(t)) > th["parseval_tol"]:
                problems.append(f"Parseval at t={t}")
        ranks = {"identity": hermite_rank(identity()), "hermite2": hermite_rank(hermite2()),
                 "mixed": hermite_rank(linear_combination(0.0, 1.0)), "exponential": hermite_rank(exponential_marginal())}
        if ranks != {"identity": 1, "hermite2": 2, "mixed": 2, "exponential": 1}:
            problems.append(f"ranks {ranks}")
        seconds = time.perf_counter() - start
        record(3, "Hermite machinery", not problems, "; ".join(problems) or f"coefficients, ranks {ranks}, Parseval", seconds, th["max_seconds"])

    def test_4_bias_rate(self, tmp_path):
        start = time.perf_counter()
        details, passed = [], True
        for v in (0, 2):
            cfg = ExperimentConfig.from_dict(
                {
                    "model": {"trend": SINE_45},
                    "design": {"n": 1, "N": 10_000},
                    "kernel": {"v": v},
                    "study": {"kind": "bias", "bandwidths": [0.05, 0.07, 0.1, 0.14, 0.2], "probes": PROBES},
                }
            )
            res = run_study(cfg, TH)
            emit_report(res, tmp_path / f"v{v}")
            passed &= res.passed
            slopes = ", ".join(f"{s.slope:.3f}" for s in res.slopes)
            details.append(f"v={v} slopes {slopes}")
            if v == 0:
                ratios = [c.value for c in res.checks if c.name.startswith("bias ratio")]
                details.append("ratios " + ", ".join(f"{r:.4f}" for r in ratios))
            if not res.passed:
                details.append(study_lines(res))
        seconds = time.perf_counter() - start
        record(4, "bias rate", passed, "; ".join(details), seconds, TH["bias"]["max_seconds"])

    @pytest.mark.slow
    def test_5_variance_rate(self):
        cfg = ExperimentConfig.from_dict(
            {
                "lrd": {"d": 0.3},
                "design": {"N": 10_000},
                "study": {"kind": "variance", "bandwidths": [0.1], "replicates": 300, "n_values": [25, 50, 100, 200],
                          "probes": PROBES, "master_seed": 5},
            }
        )
        start = time.perf_counter()
        res = run_study(cfg, TH)
        seconds = time.perf_counter() - start
        slopes = ", ".join(f"{s.slope:.3f}" for s in res.slopes)
        ratios = ", ".join(f"{c.value:.3f}" for c in res.checks if c.name.startswith("n var"))
        detail = f"slopes {slopes}; n var / C_var at n=200 {ratios}"
        if not res.passed:
            detail += "; " + study_lines(res)
        record(5, "variance leading term", res.passed, detail, seconds, TH["variance"]["max_seconds"])

    @pytest.mark.slow
    def test_6_lrd_term(self):
        start = time.perf_counter()
        details, passed = [], True
        for d, transform in ((0.3, "identity"), (0.4, "hermite2")):
            cfg = ExperimentConfig.from_dict(
                {
                    "lrd": {"d": d},
                    "subordination": {"transform": transform},
                    "model": {"eigenvalues": [0.0, 0.0, 0.0]},
                    "design": {"n": 10},
                    "study": {"kind": "lrd", "bandwidths": [0.1], "replicates": 300, "t_max_values": [1000, 4000, 16000],
                              "probes": PROBES, "master_seed": 6},
                }
            )
            res = run_study(cfg, TH)
            passed &= res.passed
            slopes = ", ".join(f"{s.slope:.3f}" for s in res.slopes)
            levels = res.tables["lrd"].column("ratio")
            details.append(
                f"d={d} q={res.meta['q']} target {res.meta['target_slope']:.2f} slopes {slopes},"
                f" levels {levels.min():.3f}..{levels.max():.3f}"
            )
            if not res.passed:
                details.append(study_lines(res))
        seconds = time.perf_counter() - start
        record(6, "LRD variance term", passed, "; ".join(details), seconds, TH["lrd"]["max_seconds"])

    @pytest.mark.slow
    def test_7_clt(self):
        cfg = ExperimentConfig.from_dict(
            {
                "design": {"n": 200, "N": 10_000},
                "study": {"kind": "clt", "bandwidths": [0.03], "replicates": 500, "c_lower": 0.1, "probes": PROBES,
                          "master_seed": 7},
            }
        )
        start = time.perf_counter()
        res = run_study(cfg, TH)
        seconds = time.perf_counter() - start
        pvals = ", ".join(f"{p:.3f}" for p in res.tables["clt"].column("ks_pvalue"))
        zs = ", ".join(f"{z:.2f}" for z in res.tables["clt_cov"].column("z_score"))
        lo, hi = res.meta["window"]
        detail = f"b=0.03 in [{lo:.4g}, {hi:.4g}); KS p-values {pvals}; covariance z-scores {zs}"
        record(7, "CLT", res.passed, detail, seconds, TH["clt"]["max_seconds"])

    def test_8_bandwidth(self):
        start = time.perf_counter()
        problems = []
        for d in (0.1, 0.25, 0.3, 0.45):
            for n_points in (10**3, 10**4, 10**5):
                for v, denom in ((0, 3 - 2 * d), (2, 7 - 2 * d)):
                    w = bandwidth_window(100, n_points, d, 1, v, v + 2, 1.0)
                    expected = n_points ** (-(1 - 2 * d) / denom)
                    if not math.isclose(w.b_low, expected, rel_tol=1e-12):
                        problems.append(f"d={d} N={n_points} v={v}")
        first = bandwidth_window(100, 10_000, 0.3, 1, 0, 2, 1.0)
        second = bandwidth_window(100, 10_000, 0.3, 1, 2, 4, 1.0)
        if not (first.feasible and round(first.b_low, 3) == 0.215 and round(first.b_high, 3) == 0.316):
            problems.append("v=0 example")
        if second.feasible or round(second.b_low, 3) != 0.562 or round(second.b_high, 3) != 0.316:
            problems.append("v=2 example")
        seconds = time.perf_counter() - start
        detail = "; ".join(problems) or (
            f"v=0 [{first.b_low:.3f}, {first.b_high:.3f}) feasible; v=2 [{second.b_low:.3f}, {second.b_high:.3f})"
            f" infeasible, {second.growth_condition}"
        )
        record(8, "bandwidth windows", not problems, detail, seconds, TH["bandwidth"]["max_seconds"])

    def test_9_reproducibility(self, tmp_path):
        base = {"design": {"n": 8, "N": 500}, "study": {"replicates": 30, "master_seed": 9, "bandwidths": [0.1, 0.14, 0.2]}}
        extras = {
            "bias": {"noise": True},
            "variance": {"n_values": [4, 8]},
            "lrd": {"t_max_values": [300, 600]},
            "clt": {"bandwidths": [0.1], "c_lower": 0.1},
        }
        th = {**TH, "variance": {**TH["variance"], "min_replicates": 10}}
        start = time.perf_counter()
        mismatched, files = [], 0
        for kind, extra in extras.items():
            doc = {"design": dict(base["design"]), "study": {**base["study"], "kind": kind, **extra}}
            for run in ("a", "b"):
                emit_report(run_study(ExperimentConfig.from_dict(doc), th), tmp_path / kind / run)
            for path in sorted((tmp_path / kind / "a").glob("*.csv")):
                files += 1
                if path.read_bytes() != (tmp_path / kind / "b" / path.name).read_bytes():
                    mismatched.append(f"{kind}/{path.name}")
        seconds = time.perf_counter() - start
        detail = f"{files} CSVs compared" + (f"; differ: {', '.join(mismatched)}" if mismatched else ", all byte-identical")
        record(9, "reproducibility", not mismatched, detail, seconds)
