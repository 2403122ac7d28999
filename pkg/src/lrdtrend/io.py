"""CSV and JSON serialisation of panels, designs, estimates and theory curves.

All CSVs are UTF-8 with a header row; floats are written with 17 significant
digits so that values round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .design import SamplingDesign
from .errors import ConfigError
from .estimator import EstimateCurve
from .fda import Panel

PANEL_COLUMNS = ["subject", "j", "T", "t", "Y"]
DESIGN_COLUMNS = ["subject", "j", "T"]
ESTIMATE_COLUMNS = ["t", "value", "masked"]
THEORY_COLUMNS = ["t", "c_bias", "c_var", "i_q"]


def format_value(value) -> str:
    """Floats with 17 significant digits; everything else via ``str``."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def write_csv(path, columns, rows) -> Path:
    """Write dict rows under ``columns``; IO errors propagate unchanged."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
    return path


def _write_columns(path, columns, arrays) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for values in zip(*arrays):
            writer.writerow([format_value(v) for v in values])
    return path


def _read_columns(path, expected) -> dict:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[: len(expected)] != expected:
            raise ConfigError(f"{path}: expected columns {expected}, found {header}")
        rows = list(reader)
    cols = list(zip(*rows)) if rows else [()] * len(header)
    return {name: list(col) for name, col in zip(header, cols)}


def provenance_path(path) -> Path:
    """Sidecar JSON next to a CSV: ``panel.csv`` -> ``panel.json``."""
    return Path(path).with_suffix(".json")


# ---------------------------------------------------------------------------
# designs and panels
# ---------------------------------------------------------------------------


def write_design(design: SamplingDesign, path) -> Path:
    return _write_columns(path, DESIGN_COLUMNS, [design.subject, design.j, design.times])


def _design_from_columns(cols: dict, generator: str = "csv") -> SamplingDesign:
    subject = np.asarray(cols["subject"], dtype=np.int64)
    j = np.asarray(cols["j"], dtype=np.int64)
    times = np.asarray(cols["T"], dtype=np.int64)
    if subject.size == 0:
        raise ConfigError("design has no observations")
    if np.any(np.diff(subject) < 0) or subject[0] != 0 or np.any(np.diff(np.unique(subject)) != 1):
        raise ConfigError("subjects must be numbered 0..n-1 and stored contiguously")
    counts = np.bincount(subject)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    design = SamplingDesign(times, offsets, generator)
    if not np.array_equal(design.j, j):
        raise ConfigError("column j must run 1..N_i within each subject")
    return design


def read_design(path) -> SamplingDesign:
    return _design_from_columns(_read_columns(path, DESIGN_COLUMNS))


def write_panel(panel: Panel, path) -> Path:
    """Panel CSV plus its provenance as a JSON sidecar."""
    design = panel.design
    out = _write_columns(path, PANEL_COLUMNS, [design.subject, design.j, design.times, design.t, panel.values])
    provenance_path(path).write_text(
        json.dumps(panel.provenance, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8"
    )
    return out


def read_panel(path) -> Panel:
    cols = _read_columns(path, PANEL_COLUMNS)
    design = _design_from_columns(cols)
    t = np.asarray(cols["t"], dtype=float)
    if not np.allclose(t, design.t, rtol=0.0, atol=1e-12):
        raise ConfigError("column t does not equal T / max(T)")
    sidecar = provenance_path(path)
    provenance = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else {}
    return Panel(design, np.asarray(cols["Y"], dtype=float), provenance)


# ---------------------------------------------------------------------------
# estimates and theory
# ---------------------------------------------------------------------------


def write_estimate(curve: EstimateCurve, path) -> Path:
    return _write_columns(path, ESTIMATE_COLUMNS, [curve.grid, curve.values, curve.boundary_mask])


def read_estimate(path, v: int = 0, b: float = float("nan")) -> EstimateCurve:
    cols = _read_columns(path, ESTIMATE_COLUMNS)
    mask = np.array([m == "true" for m in cols["masked"]], dtype=bool)
    return EstimateCurve(np.asarray(cols["t"], dtype=float), np.asarray(cols["value"], dtype=float), v, b, mask)


def write_theory(path, t, c_bias, c_var, i_q) -> Path:
    t = np.asarray(t, dtype=float)
    arrays = [np.broadcast_to(np.asarray(a, dtype=float), t.shape) for a in (c_bias, c_var, i_q)]
    return _write_columns(path, THEORY_COLUMNS, [t, *arrays])
