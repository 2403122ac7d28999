"""Write study results as CSV tables, long-format plot data and a text summary."""

from __future__ import annotations

import json
from pathlib import Path

from ..io import format_value, write_csv
from .studies import SCHEMAS, Check, StudyResult, Table, empty_result

SLOPE_COLUMNS = ["label", "slope", "stderr", "ci_low", "ci_high", "intercept", "r_squared", "max_abs_residual", "points"]
CHECK_COLUMNS = ["name", "value", "target", "tolerance", "passed", "detail"]
LONG_COLUMNS = ["table", "cell", "statistic", "value"]


def _slope_rows(result: StudyResult) -> list[dict]:
    return [
        {
            "label": s.label,
            "slope": s.slope,
            "stderr": s.stderr,
            "ci_low": s.ci_low,
            "ci_high": s.ci_high,
            "intercept": s.intercept,
            "r_squared": s.r_squared,
            "max_abs_residual": s.max_abs_residual,
            "points": len(s.x),
        }
        for s in result.slopes
    ]


def _check_rows(checks: list[Check]) -> list[dict]:
    return [
        {
            "name": c.name,
            "value": c.value,
            "target": c.target,
            "tolerance": c.tolerance,
            "passed": c.passed,
            "detail": c.detail,
        }
        for c in checks
    ]


def long_format(name: str, table: Table) -> list[dict]:
    """One row per (cell, statistic); the cell label joins the key columns."""
    out = []
    for row in table.rows:
        cell = ";".join(f"{k}={format_value(row[k])}" for k in table.keys)
        for col in table.columns:
            if col in table.keys:
                continue
            out.append({"table": name, "cell": cell, "statistic": col, "value": row[col]})
    return out


def summary_text(result: StudyResult) -> str:
    lines = [f"study: {result.kind}", f"replicates: {result.meta.get('replicates', '')}"]
    for s in result.slopes:
        lines.append(
            f"slope {s.label}: {s.slope:.4f} (se {s.stderr:.4f}, 95% ci [{s.ci_low:.4f}, {s.ci_high:.4f}],"
            f" max |resid| {s.max_abs_residual:.3g})"
        )
    for c in result.checks:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"[{mark}] {c.name}: value {c.value:.6g}, target {c.target:.6g}, tolerance {c.tolerance:.6g}")
    lines.append(f"overall: {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def emit_report(result: StudyResult, path) -> list[Path]:
    """Write every table of ``result`` plus slopes, checks, long data and a summary.

    Files are named ``<kind>.csv``, ``<kind>_slopes.csv``, ``<kind>_checks.csv``,
    ``<kind>_long.csv`` and ``<kind>_summary.txt`` inside directory ``path``.
    The output depends only on ``result``, so identical results give
    byte-identical files. IO errors propagate unchanged.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    kind = result.kind
    written = []
    long_rows = []
    tables = result.tables if result.tables or kind not in SCHEMAS else empty_result(kind).tables
    for name, table in tables.items():
        written.append(write_csv(out / f"{name}.csv", table.columns, table.rows))
        long_rows.extend(long_format(name, table))
    written.append(write_csv(out / f"{kind}_slopes.csv", SLOPE_COLUMNS, _slope_rows(result)))
    written.append(write_csv(out / f"{kind}_checks.csv", CHECK_COLUMNS, _check_rows(result.checks)))
    written.append(write_csv(out / f"{kind}_long.csv", LONG_COLUMNS, long_rows))
    summary = out / f"{kind}_summary.txt"
    summary.write_text(summary_text(result), encoding="utf-8")
    written.append(summary)
    meta = out / f"{kind}_meta.json"
    meta.write_text(json.dumps(result.meta, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    written.append(meta)
    return written
