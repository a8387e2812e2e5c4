"""Render a report directory from harness outputs: one metrics table plus
one velocity chart per scenario found."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt

from .data import MODES
from .errors import SchemaMismatch
from .render import PlotSpec, render_metrics_table, render_velocity_comparison


def _discover_series(in_dir: Path) -> dict:
    """scenario id -> {mode: csv path}, from plot_<scenario>_<mode>.csv names."""
    found = {}
    for path in sorted(in_dir.glob("plot_*.csv")):
        stem = path.stem[len("plot_"):]
        sid, _, mode = stem.rpartition("_")
        if not sid or mode not in MODES:
            continue
        found.setdefault(sid, {})[mode] = path
    return found


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quadmpc-plots",
        description="Figures and a metrics table from a harness output directory.",
    )
    parser.add_argument("--in", dest="in_dir", required=True, help="harness output directory")
    parser.add_argument("--out", dest="out_dir", required=True, help="report directory")
    parser.add_argument("--title", default="", help="title prefix for the charts")
    args = parser.parse_args(argv)

    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    try:
        table = render_metrics_table(in_dir / "matrix.csv")
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.md").write_text(table)
        print(f"wrote {out_dir / 'metrics.md'}")

        for sid, inputs in _discover_series(in_dir).items():
            ordered = {m: inputs[m] for m in MODES if m in inputs}
            title = f"{args.title} {sid}".strip()
            spec = PlotSpec(inputs=ordered, output=str(out_dir / f"velocity_{sid}.png"),
                            title=title)
            fig = render_velocity_comparison(spec)
            plt.close(fig)
            print(f"wrote {out_dir / f'velocity_{sid}.png'}")
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
