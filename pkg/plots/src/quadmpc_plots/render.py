"""Figure and table rendering from harness CSV outputs. File output only."""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")  # batch rendering; never pops a window

import matplotlib.pyplot as plt
import numpy as np

from .data import MODES, read_matrix_csv, read_velocity_csv
from .errors import SchemaMismatch

# one fixed color per compensation mode so figures stay comparable across
# scenarios; unknown labels fall back to the cycle below
MODE_COLORS = {"off": "tab:gray", "static": "tab:blue", "periodic": "tab:green"}
FALLBACK_COLORS = ("tab:orange", "tab:purple", "tab:brown")


@dataclass
class PlotSpec:
    """Inputs and styling for one velocity-comparison chart.

    inputs maps a series label (normally the compensation mode) to a CSV
    in the harness extract schema; all inputs must share the time base and
    the commanded profile.
    """

    inputs: dict
    output: str
    title: str = ""

    def __post_init__(self):
        if not 1 <= len(self.inputs) <= 3:
            raise ValueError(f"need 1 to 3 input series, got {len(self.inputs)}")


def render_velocity_comparison(spec: PlotSpec):
    """Write the commanded-vs-measured chart; returns the figure."""
    series = {label: read_velocity_csv(path) for label, path in spec.inputs.items()}
    labels = list(series)
    base = series[labels[0]]
    for label in labels[1:]:
        s = series[label]
        if not np.array_equal(s.t, base.t):
            raise SchemaMismatch(f"series {label!r} has a different time base")
        if not np.array_equal(s.commanded, base.commanded):
            raise SchemaMismatch(f"series {label!r} has a different commanded profile")

    fig, ax = plt.subplots(figsize=(8.0, 3.5))
    ax.plot(base.t, base.commanded, "r--", linewidth=1.4, label="commanded")
    for i, label in enumerate(labels):
        color = MODE_COLORS.get(label, FALLBACK_COLORS[i % len(FALLBACK_COLORS)])
        ax.plot(base.t, series[label].measured, color=color, linewidth=1.0, label=label)

    # mark where the commanded velocity steps; these separate the profile
    # segments without needing the config that produced them
    changes = np.nonzero(np.diff(base.commanded) != 0.0)[0]
    for i in changes:
        ax.axvline(base.t[i + 1], color="k", linewidth=0.6, alpha=0.4)

    ax.set_xlabel("time (s)")
    ax.set_ylabel("forward velocity (m/s)")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="lower right", fontsize=9)
    ax.margins(x=0.0)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    return fig


def render_metrics_table(matrix_path) -> str:
    """Markdown table of per-scenario tracking MSE, best mode in bold.

    Values render with 3 decimals; cells tying with the row minimum at
    that precision are all bolded.
    """
    rows = read_matrix_csv(matrix_path)
    order = []
    by_scenario = {}
    for r in rows:
        if r.scenario_id not in by_scenario:
            order.append(r.scenario_id)
            by_scenario[r.scenario_id] = {}
        by_scenario[r.scenario_id][r.mode] = r

    lines = [
        "| scenario | f (Hz) | d (N) | A (N) | " + " | ".join(MODES) + " |",
        "|---|---|---|---|---|---|---|",
    ]
    for sid in order:
        group = by_scenario[sid]
        meta = next(iter(group.values()))
        values = {m: group[m].mse_vx_x1000 for m in MODES if m in group}
        best = round(min(values.values()), 3) if values else None
        cells = []
        for m in MODES:
            if m not in group:
                cells.append("")
                continue
            text = f"{values[m]:.3f}"
            if round(values[m], 3) == best:
                text = f"**{text}**"
            if group[m].failed:
                text += " (failed)"
            cells.append(text)
        lines.append(
            f"| {sid} | {meta.frequency:g} | {meta.d_static:g} | {meta.amplitude:g} | "
            + " | ".join(cells)
            + " |"
        )
    return "\n".join(lines) + "\n"
