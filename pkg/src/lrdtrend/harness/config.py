"""Experiment configuration: one document, six sections, validated up front.

A configuration is a TOML (or JSON) document with the sections ``model``,
``lrd``, ``subordination``, ``design``, ``kernel`` and ``study``::

    [model]
    trend = {name = "sine", amplitude = 1.0, frequency = 1.0, phase = 0.0}
    basis = "cosine"
    eigenvalues = [1.0, 0.25, 0.1111]

    [lrd]
    d = 0.3

    [subordination]
    transform = "identity"
    params = {}
    q = 1

    [design]
    generator = "equidistant"
    n = 200
    N = 10000
    jitter = 0.0

    [kernel]
    v = 0
    k = 2

    [study]
    kind = "clt"
    bandwidths = [0.03]
    replicates = 500
    master_seed = 20240601
    output_dir = "out"
"""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..design import SamplingDesign, check_design, make_equidistant, make_jittered, make_poisson
from ..errors import ConfigError, LrdTrendError
from ..fda import BASES, FunctionalModel, make_trend
from ..hermite import SubordinationMap, hermite_rank, long_memory_inherited, make_transform
from ..kernels import KernelOfOrder, build_default_kernel, build_higher_order_kernel, certify
from ..lrd import LrdGaussianModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SECTIONS = ("model", "lrd", "subordination", "design", "kernel", "study")
STUDY_KINDS = ("bias", "variance", "lrd", "clt")

DEFAULTS = {
    "model": {"trend": {"name": "sine"}, "basis": "cosine", "eigenvalues": [1.0, 0.25, 1.0 / 9.0], "score_law": "gaussian"},
    "lrd": {"d": 0.3},
    "subordination": {"transform": "identity", "params": {}, "q": None},
    "design": {"generator": "equidistant", "n": 200, "N": 10_000, "jitter": 0.0, "scale": 10, "seed": 0},
    "kernel": {"v": 0, "k": None},
    "study": {
        "kind": "bias",
        "bandwidths": [0.05, 0.07, 0.1, 0.14, 0.2],
        "replicates": 300,
        "master_seed": 0,
        "output_dir": "out",
        "probes": [0.3, 0.5, 0.7],
        "noise": False,
        "n_values": [],
        "t_max_values": [],
        "c_lower": 1.0,
        "workers": 1,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key not in ("trend", "params"):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass
class ExperimentConfig:
    """Parsed configuration; sections are kept as plain dicts.

    Use the ``build_*`` methods to turn sections into library objects and
    :meth:`validate` to certify all of them before any replicate runs.
    """

    model: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["model"]))
    lrd: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["lrd"]))
    subordination: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["subordination"]))
    design: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["design"]))
    kernel: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["kernel"]))
    study: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["study"]))

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentConfig:
        unknown = set(doc) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        merged = {name: _merge(DEFAULTS[name], doc.get(name, {})) for name in SECTIONS}
        for name in SECTIONS:
            extra = set(merged[name]) - set(DEFAULTS[name])
            if extra:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")
        return cls(**merged)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            doc = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {name: copy.deepcopy(getattr(self, name)) for name in SECTIONS}

    def replace(self, **sections) -> ExperimentConfig:
        """Copy with some sections partially overridden."""
        doc = self.to_dict()
        for name, override in sections.items():
            doc[name] = _merge(doc[name], override)
        return ExperimentConfig.from_dict(doc)

    # -- builders ---------------------------------------------------------

    @property
    def kind(self) -> str:
        return self.study["kind"]

    def build_model(self) -> FunctionalModel:
        section = self.model
        trend_params = dict(section["trend"])
        trend = make_trend(trend_params.pop("name"), **trend_params)
        try:
            basis_cls = BASES[section["basis"]]
        except KeyError:
            raise ConfigError(f"unknown basis {section['basis']!r}; choose from {sorted(BASES)}") from None
        lam = tuple(float(x) for x in section["eigenvalues"])
        phis = tuple(basis_cls(l) for l in range(1, len(lam) + 1))
        return FunctionalModel(trend, lam, phis, section["score_law"], (), copy.deepcopy(section))

    def build_lrd(self) -> LrdGaussianModel:
        return LrdGaussianModel(float(self.lrd["d"]))

    def build_transform(self) -> SubordinationMap:
        section = self.subordination
        return make_transform(section["transform"], **dict(section["params"]))

    def build_design(self, n: int | None = None, n_points: int | None = None) -> SamplingDesign:
        section = self.design
        n = int(section["n"] if n is None else n)
        n_points = int(section["N"] if n_points is None else n_points)
        generator = section["generator"]
        if generator == "equidistant":
            return make_equidistant(n, n_points)
        if generator == "jittered":
            return make_jittered(n, n_points, float(section["jitter"]), seed=int(section["seed"]), scale=int(section["scale"]))
        if generator == "poisson":
            return make_poisson(n, n_points, seed=int(section["seed"]), mean_gap=float(section["scale"]))
        raise ConfigError(f"unknown design generator {generator!r}")

    def build_kernel(self) -> KernelOfOrder:
        v = int(self.kernel["v"])
        k = self.kernel["k"]
        if k is None or int(k) == v + 2:
            return build_default_kernel(v)
        return build_higher_order_kernel(v, int(k))

    @property
    def q(self) -> int:
        """Configured Hermite rank, detected from the transform when unset."""
        q = self.subordination["q"]
        return hermite_rank(self.build_transform()) if q is None else int(q)

    # -- validation -------------------------------------------------------

    def validate(self) -> dict:
        """Certify every section; raise :class:`ConfigError` listing all failures.

        Returns the built objects keyed by section name.
        """
        problems = []
        built = {}
        study = self.study
        if study["kind"] not in STUDY_KINDS:
            problems.append(f"study.kind must be one of {STUDY_KINDS}, got {study['kind']!r}")
        if int(study["replicates"]) < 1:
            problems.append("study.replicates must be >= 1")
        try:
            built["kernel"] = self.build_kernel()
            certify(built["kernel"])
        except (LrdTrendError, ValueError) as exc:
            problems.append(f"kernel: {exc}")
        try:
            built["model"] = self.build_model()
            if not built["model"].check_orthonormal():
                problems.append("model: basis is not orthonormal on [0, 1]")
        except (TypeError, ValueError) as exc:
            problems.append(f"model: {exc}")
        try:
            built["lrd"] = self.build_lrd()
        except ValueError as exc:
            problems.append(f"lrd: {exc}")
        try:
            built["subordination"] = self.build_transform()
            detected = hermite_rank(built["subordination"])
            expected = self.subordination["q"]
            if expected is not None and int(expected) != detected:
                problems.append(f"subordination: expected rank q={expected}, detected {detected}")
            built["q"] = detected
        except (TypeError, ValueError) as exc:
            problems.append(f"subordination: {exc}")
        if "lrd" in built and built.get("q"):
            d, q = built["lrd"].d, built["q"]
            if not long_memory_inherited(d, q):
                problems.append(f"violated 1/2 - 1/(2q) < d < 1/2 with d={d}, q={q} (need d > {0.5 - 0.5 / q:.6g})")
        try:
            built["design"] = self.build_design()
            bandwidths = study["bandwidths"] or [0.1]
            report = check_design(built["design"], float(min(bandwidths)), float(self.lrd["d"]), built.get("q") or 1)
            if not report.ok:
                problems.append("design: " + "; ".join(report.lines()[4:7]))
        except (TypeError, ValueError) as exc:
            problems.append(f"design: {exc}")
        for b in study["bandwidths"]:
            if not 0.0 < float(b) < 0.5:
                problems.append(f"study.bandwidths: {b} outside (0, 1/2)")
        for t in study["probes"]:
            if not 0.0 < float(t) < 1.0:
                problems.append(f"study.probes: {t} outside (0, 1)")
        if problems:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems))
        return built


def probes_array(config: ExperimentConfig) -> np.ndarray:
    return np.asarray(config.study["probes"], dtype=float)
