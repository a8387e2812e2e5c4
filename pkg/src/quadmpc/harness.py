"""Benchmark harness: scenario matrix, MSE metrics and delimited outputs.

Every scenario runs under the three compensation modes; each episode
leaves a full trajectory log, a small velocity-tracking extract and one
row in matrix.csv.  Tracking error is scored on the forward velocity
channel and reported scaled by 1000.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, default_scenarios, load_config
from .errors import ConfigParseError, DimensionMismatch, EmptyLog
from .estimator import MODES
from .reference import generate_reference  # re-export: reference generation lives here
from .sim import STATE_COLUMNS, TrajectoryLog, run_episode

MATRIX_HEADER = ("scenario_id", "frequency_hz", "d_static_n", "amplitude_n", "mode", "mse_vx_x1000", "failed")
PLOT_HEADER = ("t", "vx_commanded", "vx_measured")

__all__ = [
    "MetricsRow",
    "compute_mse",
    "generate_reference",
    "run_scenario_matrix",
    "export_plot_data",
    "check_orderings",
    "write_matrix_csv",
    "read_matrix_csv",
    "recompute_metrics",
]


@dataclass
class MetricsRow:
    scenario_id: str
    frequency: float
    d_static: float
    amplitude: float
    mode: str
    mse_vx_x1000: float
    failed: bool


def _channel_index(channel) -> int:
    if isinstance(channel, str):
        if channel not in STATE_COLUMNS:
            raise DimensionMismatch(f"unknown state channel {channel!r}")
        return STATE_COLUMNS.index(channel)
    idx = int(channel)
    if not 0 <= idx < len(STATE_COLUMNS):
        raise DimensionMismatch(f"channel index {idx} out of range")
    return idx


def compute_mse(log: TrajectoryLog, channel="vx") -> float:
    """Mean squared reference-tracking error on one state channel."""
    if len(log) == 0:
        raise EmptyLog("trajectory log holds no rows")
    c = _channel_index(channel)
    err = log.refs[:, c] - log.states[:, c]
    return float(np.mean(err * err))


def full_state_mse(log: TrajectoryLog) -> float:
    """Identity-weighted MSE over all 12 channels; diagnostic only."""
    if len(log) == 0:
        raise EmptyLog("trajectory log holds no rows")
    err = log.refs - log.states
    return float(np.mean(np.sum(err * err, axis=1)))


def metrics_row(scenario: ScenarioConfig, mode: str, log: TrajectoryLog) -> MetricsRow:
    return MetricsRow(
        scenario_id=scenario.scenario_id,
        frequency=scenario.disturbance.frequency,
        d_static=scenario.d_static_scalar,
        amplitude=scenario.disturbance.amplitude,
        mode=mode,
        mse_vx_x1000=compute_mse(log, "vx") * 1000.0,
        failed=log.failed,
    )


def export_plot_data(log: TrajectoryLog, path) -> None:
    """Velocity-tracking extract: time, commanded v_x, measured v_x."""
    c = _channel_index("vx")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOT_HEADER)
        for i in range(len(log)):
            writer.writerow(
                [f"{log.t[i]:.17g}", f"{log.refs[i, c]:.17g}", f"{log.states[i, c]:.17g}"]
            )


def write_matrix_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MATRIX_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.scenario_id,
                    f"{r.frequency:.17g}",
                    f"{r.d_static:.17g}",
                    f"{r.amplitude:.17g}",
                    r.mode,
                    f"{r.mse_vx_x1000:.17g}",
                    int(r.failed),
                ]
            )


def read_matrix_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != MATRIX_HEADER:
            raise DimensionMismatch(f"unexpected matrix header in {path}")
        for rec in reader:
            rows.append(
                MetricsRow(
                    scenario_id=rec[0],
                    frequency=float(rec[1]),
                    d_static=float(rec[2]),
                    amplitude=float(rec[3]),
                    mode=rec[4],
                    mse_vx_x1000=float(rec[5]),
                    failed=bool(int(rec[6])),
                )
            )
    return rows


def _episode_job(args):
    scenario, mode = args
    return run_episode(scenario, mode)


def run_scenario_matrix(
    config_path=None,
    out_dir="out",
    scenario_filter=None,
    mode_filter=None,
    parallel: int = 1,
    verbose: bool = True,
) -> list:
    """Run scenarios x modes, write all CSV outputs, return the metrics rows."""
    scenarios = load_config(config_path) if config_path is not None else default_scenarios()
    if scenario_filter is not None:
        scenarios = [s for s in scenarios if s.scenario_id == scenario_filter]
        if not scenarios:
            raise ConfigParseError(f"no scenario named {scenario_filter!r}")
    modes = list(MODES) if mode_filter is None else [mode_filter]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(s, m) for s in scenarios for m in modes]
    if parallel > 1:
        with multiprocessing.Pool(parallel) as pool:
            logs = pool.map(_episode_job, jobs)
    else:
        logs = [_episode_job(j) for j in jobs]

    rows = []
    manifest = {}
    for (scenario, mode), log in zip(jobs, logs):
        row = metrics_row(scenario, mode, log)
        rows.append(row)
        stem = f"{scenario.scenario_id}_{mode}"
        log.to_csv(out / f"episode_{stem}.csv")
        export_plot_data(log, out / f"plot_{stem}.csv")
        manifest[scenario.scenario_id] = {
            "frequency": scenario.disturbance.frequency,
            "d_static": scenario.d_static_scalar,
            "amplitude": scenario.disturbance.amplitude,
        }
        if verbose:
            flag = "  FAILED" if row.failed else ""
            print(
                f"{scenario.scenario_id:>6}  {mode:>8}  f={row.frequency:4.2f} Hz  "
                f"d={row.d_static:6.1f} N  A={row.amplitude:5.1f} N  "
                f"mse_vx*1000={row.mse_vx_x1000:8.3f}{flag}"
            )

    write_matrix_csv(rows, out / "matrix.csv")
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    if verbose:
        print(f"wrote {len(rows)} rows to {out / 'matrix.csv'}")
    return rows


def recompute_metrics(in_dir) -> list:
    """Rebuild metrics rows from stored episode logs."""
    in_path = Path(in_dir)
    manifest_path = in_path / "manifest.json"
    meta = {}
    if manifest_path.exists():
        with open(manifest_path) as fh:
            meta = json.load(fh)
    rows = []
    for episode in sorted(in_path.glob("episode_*.csv")):
        stem = episode.stem[len("episode_") :]
        scenario_id, _, mode = stem.rpartition("_")
        log = TrajectoryLog.from_csv(episode)
        info = meta.get(scenario_id, {})
        rows.append(
            MetricsRow(
                scenario_id=scenario_id,
                frequency=float(info.get("frequency", np.nan)),
                d_static=float(info.get("d_static", np.nan)),
                amplitude=float(info.get("amplitude", np.nan)),
                mode=mode,
                mse_vx_x1000=compute_mse(log, "vx") * 1000.0,
                failed=log.failed,
            )
        )
    if not rows:
        raise EmptyLog(f"no episode logs found under {in_dir}")
    return rows


def check_orderings(rows, min_improvement: float = 0.30, parity_margin: float = 0.25) -> list:
    """Ordering checks across modes; returns human-readable failure strings.

    For every scenario with a sinusoidal component of at least 10 N the
    periodic mode must beat both other modes and improve on static by
    min_improvement; pure-static scenarios only require periodic to stay
    within parity_margin of the best mode.
    """
    by_scenario = {}
    for r in rows:
        by_scenario.setdefault(r.scenario_id, {})[r.mode] = r
    failures = []
    for sid, group in sorted(by_scenario.items()):
        if set(group) != set(MODES):
            failures.append(f"{sid}: missing modes {set(MODES) - set(group)}")
            continue
        if any(r.failed for r in group.values()):
            failures.append(f"{sid}: episode failure flagged")
            continue
        off, static, periodic = (
            group["off"].mse_vx_x1000,
            group["static"].mse_vx_x1000,
            group["periodic"].mse_vx_x1000,
        )
        amp = group["periodic"].amplitude
        if amp >= 10.0:
            if not (periodic < static and periodic < off):
                failures.append(
                    f"{sid}: periodic {periodic:.3f} not below static {static:.3f} "
                    f"and off {off:.3f}"
                )
            elif (static - periodic) / static < min_improvement:
                failures.append(
                    f"{sid}: improvement over static "
                    f"{(static - periodic) / static:.1%} < {min_improvement:.0%}"
                )
        elif amp == 0.0:
            best = min(off, static, periodic)
            if periodic > best * (1.0 + parity_margin):
                failures.append(
                    f"{sid}: periodic {periodic:.3f} exceeds best {best:.3f} "
                    f"by more than {parity_margin:.0%}"
                )
    return failures
