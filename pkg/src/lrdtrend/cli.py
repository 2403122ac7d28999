"""Command-line entry point.

Exit codes: 0 success, 2 a study missed an acceptance threshold, 3 the
configuration or a certification step failed.
"""

from __future__ import annotations

import argparse
import sys

from .errors import LrdTrendError
from .estimator import default_grid, priestley_chao
from .fda import generate_panel
from .harness.config import STUDY_KINDS, ExperimentConfig
from .harness.report import emit_report, summary_text
from .harness.studies import load_thresholds, run_study
from .io import read_panel, write_design, write_estimate, write_panel, write_theory
from .kernels import build_default_kernel, build_higher_order_kernel, certify
from .theory import TheoryConstants, bandwidth_window

EXIT_OK = 0
EXIT_THRESHOLD = 2
EXIT_CONFIG = 3


def _kernel(v: int, k: int | None):
    return build_default_kernel(v) if k is None or k == v + 2 else build_higher_order_kernel(v, k)


def cmd_simulate(args) -> int:
    config = ExperimentConfig.load(args.config)
    built = config.validate()
    smap = None if args.no_noise else built["subordination"]
    panel = generate_panel(
        built["model"],
        built["design"],
        built["lrd"],
        smap,
        seed=int(config.study["master_seed"]),
        replicate=args.replicate,
        include_scores=not args.no_curves,
    )
    panel.provenance["config"] = config.to_dict()
    write_panel(panel, args.out)
    if args.design_out:
        write_design(built["design"], args.design_out)
    print(f"wrote {panel.values.size} observations of {panel.design.n} subjects to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    panel = read_panel(args.panel)
    kernel = _kernel(args.v, args.k)
    grid = default_grid(args.grid_points)
    curve = priestley_chao(panel, kernel, args.bandwidth, grid)
    write_estimate(curve, args.out)
    print(f"wrote {int(curve.interior.sum())} interior estimates of mu^({args.v}) to {args.out}")
    if args.theory_out:
        if not args.config:
            print("error: --theory-out needs --config for the model constants", file=sys.stderr)
            return EXIT_CONFIG
        config = ExperimentConfig.load(args.config)
        built = config.validate()
        const = TheoryConstants(built["model"], kernel, built["lrd"], built["subordination"], built.get("q") or None)
        write_theory(args.theory_out, grid, const.c_bias(grid), const.c_var(grid), const.i_q(grid))
    return EXIT_OK


def cmd_kernel_check(args) -> int:
    kernel = _kernel(args.v, args.k)
    report = certify(kernel, raise_on_failure=False)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_CONFIG


def cmd_bandwidth(args) -> int:
    window = bandwidth_window(args.n, args.N, args.d, args.q, args.v, args.k if args.k is not None else args.v + 2, args.c_lower)
    print(f"b_low  = {window.b_low:.6g}")
    print(f"b_high = {window.b_high:.6g}")
    print(f"feasible: {window.feasible}")
    print(f"growth condition: {window.growth_condition}")
    if window.note:
        print(f"note: {window.note}")
    return EXIT_OK if window.feasible else EXIT_CONFIG


def cmd_mc_study(args) -> int:
    config = ExperimentConfig.load(args.config)
    overrides = {"kind": args.kind}
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    config = config.replace(study=overrides)
    thresholds = load_thresholds(args.thresholds)
    result = run_study(config, thresholds)
    out = args.out or config.study["output_dir"]
    emit_report(result, out)
    sys.stdout.write(summary_text(result))
    return EXIT_OK if result.passed else EXIT_THRESHOLD


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrdtrend", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one panel and write it as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--design-out")
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--no-noise", action="store_true", help="switch the long-memory errors off")
    p.add_argument("--no-curves", action="store_true", help="drop the random-curve term")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate mu^(v) from a panel CSV")
    p.add_argument("--panel", required=True)
    p.add_argument("--bandwidth", type=float, required=True)
    p.add_argument("--v", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--grid-points", type=int, default=201)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="experiment config, needed for --theory-out")
    p.add_argument("--theory-out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("kernel-check", help="certify a kernel of order (v, k)")
    p.add_argument("--v", type=int, default=0)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("bandwidth", help="print the admissible bandwidth window")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--v", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--c-lower", type=float, default=1.0)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("mc-study", help="run a Monte Carlo study and write its report")
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=STUDY_KINDS, required=True)
    p.add_argument("--out")
    p.add_argument("--thresholds", help="alternative acceptance thresholds file")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_mc_study)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LrdTrendError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
