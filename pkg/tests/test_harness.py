import copy
import json

import numpy as np
import pytest

from lrdtrend.errors import ConfigError, DegenerateLimit, InfeasibleWindow
from lrdtrend.harness import (
    ExperimentConfig,
    emit_report,
    empty_result,
    fit_loglog,
    load_thresholds,
    run_study,
)
from lrdtrend.harness.config import DEFAULTS
from lrdtrend.harness.studies import SCHEMAS, _mean, _var


def small(kind, **study):
    base = {
        "design": {"n": 5, "N": 400},
        "study": {"kind": kind, "bandwidths": [0.1, 0.14, 0.2], "replicates": 20, "master_seed": 3},
    }
    base["study"].update(study)
    return base


def thresholds(**overrides):
    th = copy.deepcopy(load_thresholds())
    for section, values in overrides.items():
        th[section].update(values)
    return th


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.from_dict({})
        assert cfg.to_dict()["design"] == DEFAULTS["design"]
        built = cfg.validate()
        assert built["q"] == 1
        assert built["kernel"].k == 2

    @pytest.mark.parametrize(
        "doc,fragment",
        [
            ({"solver": {}}, "unknown config sections"),
            ({"lrd": {"H": 0.8}}, "unknown keys in [lrd]"),
        ],
    )
    def test_unknown_entries(self, doc, fragment):
        with pytest.raises(ConfigError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
            ExperimentConfig.from_dict(doc)

    @pytest.mark.parametrize(
        "doc,fragment",
        [
            ({"lrd": {"d": 0.2}, "subordination": {"transform": "hermite2"}}, "violated 1/2 - 1/(2q) < d < 1/2"),
            ({"lrd": {"d": 0.6}}, "lrd"),
            ({"study": {"kind": "power"}}, "study.kind"),
            ({"study": {"bandwidths": [0.7]}}, "study.bandwidths"),
            ({"study": {"probes": [1.5]}}, "study.probes"),
            ({"subordination": {"q": 2}}, "expected rank q=2"),
            ({"model": {"basis": "wavelet"}}, "basis"),
        ],
    )
    def test_validation_errors(self, doc, fragment):
        with pytest.raises(ConfigError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
            ExperimentConfig.from_dict(doc).validate()

    def test_collects_all_problems(self):
        cfg = ExperimentConfig.from_dict({"study": {"kind": "power", "replicates": 0}})
        with pytest.raises(ConfigError) as info:
            cfg.validate()
        assert "study.kind" in str(info.value) and "replicates" in str(info.value)

    @pytest.mark.parametrize("suffix", [".toml", ".json"])
    def test_load(self, tmp_path, suffix):
        path = tmp_path / f"c{suffix}"
        if suffix == ".json":
            path.write_text(json.dumps({"lrd": {"d": 0.35}}))
        else:
            path.write_text("[lrd]\nd = 0.35\n")
        assert ExperimentConfig.load(path).lrd["d"] == 0.35

    def test_load_parse_error(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[lrd\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.load(path)

    def test_load_example_file(self):
        from lrdtrend.harness import config

        doc = config.__doc__.split("::", 1)[1]
        text = "\n".join(line[4:] for line in doc.splitlines())
        cfg = ExperimentConfig.from_dict(config.tomllib.loads(text))
        assert cfg.kind == "clt"
        cfg.validate()


class TestFits:
    def test_exact_power_law(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        fit = fit_loglog("p", x, 3 * x**-1.5)
        assert fit.slope == pytest.approx(-1.5)
        assert fit.max_abs_residual < 1e-12
        assert fit.ci_low <= fit.slope <= fit.ci_high

    def test_order_free_aggregates(self):
        x = np.random.default_rng(0).standard_normal((200, 3)) * 1e6 + 1.0
        perm = np.random.default_rng(1).permutation(200)
        np.testing.assert_array_equal(_mean(x), _mean(x[perm]))
        np.testing.assert_array_equal(_var(x), _var(x[perm]))


class TestBiasStudy:
    def test_schema(self):
        res = run_study(ExperimentConfig.from_dict(small("bias")))
        assert res.tables["bias"].columns[:7] == ["b", "t", "replicates", "mean_bias", "se", "theory_bias", "ratio"]
        assert "slope_fit" in res.tables["bias"].columns
        assert len(res.tables["bias"].rows) == 9
        assert res.meta["replicates"] == 1

    def test_vanishing_constant_becomes_floor(self):
        doc = small("bias")
        doc["model"] = {"trend": {"name": "polynomial", "coeffs": [0.0, 1.0]}}
        res = run_study(ExperimentConfig.from_dict(doc))
        assert all(c.name.startswith("bias floor") for c in res.checks)

    def test_noisy_run(self):
        doc = small("bias", noise=True, replicates=8)
        res = run_study(ExperimentConfig.from_dict(doc))
        assert res.meta["replicates"] == 8
        assert np.all(res.tables["bias"].column("se") > 0)

    def test_probe_in_boundary(self):
        with pytest.raises(ConfigError, match="boundary"):
            run_study(ExperimentConfig.from_dict(small("bias", probes=[0.05, 0.5])))


class TestVarianceStudy:
    def test_needs_replicates(self):
        with pytest.raises(ConfigError, match="at least 300"):
            run_study(ExperimentConfig.from_dict(small("variance", n_values=[5, 10])))

    def test_small_run(self):
        cfg = ExperimentConfig.from_dict(small("variance", n_values=[4, 16], replicates=40))
        res = run_study(cfg, thresholds(variance={"min_replicates": 10}))
        assert len(res.tables["variance"].rows) == 6
        assert len(res.slopes) == 3
        assert res.slopes[0].slope < 0


class TestLrdStudy:
    def test_zero_transform(self):
        doc = small("lrd", t_max_values=[200, 400])
        doc["subordination"] = {"transform": "zero"}
        with pytest.raises(DegenerateLimit):
            run_study(ExperimentConfig.from_dict(doc))

    def test_exact_column(self):
        res = run_study(ExperimentConfig.from_dict(small("lrd", t_max_values=[200, 800])))
        table = res.tables["lrd"]
        np.testing.assert_allclose(table.column("exact"), table.column("theory"), rtol=0.1)


class TestCltStudy:
    def clt(self, **extra):
        doc = {
            "design": {"n": 20, "N": 2000},
            "study": {"kind": "clt", "bandwidths": [0.1], "replicates": 30, "c_lower": 0.1},
        }
        for key, value in extra.items():
            doc.setdefault(key, {}).update(value)
        return ExperimentConfig.from_dict(doc)

    def test_runs(self):
        res = run_study(self.clt())
        assert len(res.tables["clt"].rows) == 3
        assert len(res.tables["clt_cov"].rows) == 3
        assert "growth_condition" in res.meta

    def test_degenerate(self):
        with pytest.raises(DegenerateLimit):
            run_study(self.clt(model={"eigenvalues": [0.0, 0.0, 0.0]}))

    def test_infeasible(self):
        with pytest.raises(InfeasibleWindow, match="n = o"):
            run_study(self.clt(kernel={"v": 2}, study={"c_lower": 1.0, "probes": [0.5]}))

    def test_outside_window(self):
        with pytest.raises(ConfigError, match="outside admissible"):
            run_study(self.clt(study={"bandwidths": [0.02], "probes": [0.5]}))


class TestReport:
    @pytest.mark.parametrize("kind", sorted(SCHEMAS))
    def test_empty_result_headers(self, tmp_path, kind):
        kind_name = kind if kind != "clt_cov" else "clt"
        emit_report(empty_result(kind_name), tmp_path)
        text = (tmp_path / f"{kind}.csv").read_text(encoding="utf-8")
        assert text == ",".join(SCHEMAS[kind][0]) + "\n"

    def test_files(self, tmp_path):
        res = run_study(ExperimentConfig.from_dict(small("bias")))
        names = {p.name for p in emit_report(res, tmp_path)}
        assert names == {"bias.csv", "bias_slopes.csv", "bias_checks.csv", "bias_long.csv", "bias_summary.txt", "bias_meta.json"}
        summary = (tmp_path / "bias_summary.txt").read_text()
        assert summary.rstrip().splitlines()[-1].startswith("overall:")

    @pytest.mark.parametrize("workers", [1, 3])
    def test_byte_identical(self, tmp_path, workers):
        doc = small("bias", noise=True, replicates=6)
        emit_report(run_study(ExperimentConfig.from_dict(doc)), tmp_path / "a")
        doc["study"]["workers"] = workers
        emit_report(run_study(ExperimentConfig.from_dict(doc)), tmp_path / "b")
        for name in ("bias.csv", "bias_slopes.csv", "bias_checks.csv", "bias_long.csv", "bias_summary.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        doc = small("bias", noise=True, replicates=4)
        emit_report(run_study(ExperimentConfig.from_dict(doc)), tmp_path / "a")
        doc["study"]["master_seed"] = 4
        emit_report(run_study(ExperimentConfig.from_dict(doc)), tmp_path / "b")
        assert (tmp_path / "a" / "bias.csv").read_bytes() != (tmp_path / "b" / "bias.csv").read_bytes()
