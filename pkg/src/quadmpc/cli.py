"""Command line entry point for the benchmark matrix."""

from __future__ import annotations

import argparse
import sys

from .estimator import MODES
from .harness import check_orderings, recompute_metrics, run_scenario_matrix


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadmpc",
        description="Run disturbance-compensation scenarios and collect tracking metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the scenario matrix and write CSV outputs")
    run_p.add_argument("--config", default=None, help="JSON config file (defaults built in)")
    run_p.add_argument("--scenario", default=None, help="run a single scenario id")
    run_p.add_argument("--mode", default=None, choices=MODES, help="run a single mode")
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument("--parallel", type=int, default=1, help="worker processes")
    run_p.add_argument(
        "--check",
        action="store_true",
        help="exit nonzero if any mode-ordering check fails",
    )

    metrics_p = sub.add_parser("metrics", help="recompute metrics from stored episode logs")
    metrics_p.add_argument("--in", dest="in_dir", required=True, help="directory with episode CSVs")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        rows = run_scenario_matrix(
            config_path=args.config,
            out_dir=args.out,
            scenario_filter=args.scenario,
            mode_filter=args.mode,
            parallel=args.parallel,
        )
        if args.check:
            failures = check_orderings(rows)
            for f in failures:
                print(f"ordering check failed: {f}", file=sys.stderr)
            if failures:
                return 1
            print("all ordering checks passed")
        return 0

    if args.command == "metrics":
        rows = recompute_metrics(args.in_dir)
        for r in rows:
            flag = "  FAILED" if r.failed else ""
            print(f"{r.scenario_id:>6}  {r.mode:>8}  mse_vx*1000={r.mse_vx_x1000:8.3f}{flag}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
