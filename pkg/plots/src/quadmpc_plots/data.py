"""Readers for the two harness CSV schemas.

The header tuples are the interface contract with the benchmark harness;
they are declared here rather than imported so this package stays
installable on machines that only have the CSV outputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SchemaMismatch

VELOCITY_HEADER = ("t", "vx_commanded", "vx_measured")
MATRIX_HEADER = (
    "scenario_id",
    "frequency_hz",
    "d_static_n",
    "amplitude_n",
    "mode",
    "mse_vx_x1000",
    "failed",
)
MODES = ("off", "static", "periodic")


@dataclass
class VelocitySeries:
    t: np.ndarray
    commanded: np.ndarray
    measured: np.ndarray


@dataclass
class MatrixRow:
    scenario_id: str
    frequency: float
    d_static: float
    amplitude: float
    mode: str
    mse_vx_x1000: float
    failed: bool


def _rows(path, expected_header):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = tuple(next(reader))
            except StopIteration:
                raise SchemaMismatch(f"{path}: empty file") from None
            if header != expected_header:
                raise SchemaMismatch(f"{path}: header {header} != {expected_header}")
            body = list(reader)
    except OSError as exc:
        raise SchemaMismatch(f"cannot read {path}: {exc}") from exc
    if not body:
        raise SchemaMismatch(f"{path}: no data rows")
    return body


def read_velocity_csv(path) -> VelocitySeries:
    body = _rows(path, VELOCITY_HEADER)
    try:
        data = np.array([[float(v) for v in rec] for rec in body])
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: non-numeric cell: {exc}") from exc
    if data.shape[1] != 3:
        raise SchemaMismatch(f"{path}: expected 3 columns, got {data.shape[1]}")
    return VelocitySeries(t=data[:, 0], commanded=data[:, 1], measured=data[:, 2])


def read_matrix_csv(path) -> list:
    body = _rows(path, MATRIX_HEADER)
    rows = []
    for rec in body:
        try:
            rows.append(
                MatrixRow(
                    scenario_id=rec[0],
                    frequency=float(rec[1]),
                    d_static=float(rec[2]),
                    amplitude=float(rec[3]),
                    mode=rec[4],
                    mse_vx_x1000=float(rec[5]),
                    failed=bool(int(rec[6])),
                )
            )
        except (IndexError, ValueError) as exc:
            raise SchemaMismatch(f"{path}: bad row {rec}: {exc}") from exc
    return rows
