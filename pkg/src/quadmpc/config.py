"""JSON configuration: built-in defaults, deep-merge of overrides, scenario assembly.

A config file is one document with robot/gait/mpc/estimator/sim/profile/
scenarios sections; any subset may be given and missing keys fall back to
the defaults below.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import RobotParams
from .errors import ConfigParseError
from .estimator import EstimatorConfig
from .gait import GaitSpec, stand_gait, trot_gait
from .mpc import MpcWeights
from .reference import VelocityProfile
from .sim import DisturbanceSpec, SimConfig

DEFAULT_CONFIG = {
    "robot": {
        "mass": 12.0,
        "inertia_diag": [0.07, 0.26, 0.24],
        "mu": 0.6,
        "fz_min": 0.0,
        "fz_max": 250.0,
        "gravity": [0.0, 0.0, -9.81],
        "hip_offsets": [
            [0.18, 0.13, -0.28],
            [0.18, -0.13, -0.28],
            [-0.18, 0.13, -0.28],
            [-0.18, -0.13, -0.28],
        ],
        "com_height": 0.28,
    },
    "gait": {
        "stand": {"period": 0.6},
        "trot": {"period": 0.6, "duty_factor": 0.5},
    },
    "mpc": {
        "p_diag": [100.0, 100.0, 100.0, 100.0, 100.0, 200.0, 1.0, 1.0, 1.0, 10.0, 10.0, 10.0],
        "r_control": 1e-4,
        "horizon": 10,
        "dt": 0.03,
        "qp_tol": 1e-8,
    },
    "estimator": {
        "window": 300,
        "f_min": 0.25,
        "f_max": 2.0,
        "df": 0.01,
        "amp_threshold_force": 1.0,
        "amp_threshold_torque": 0.1,
        "refit_interval": 0.1,
        "static_freeze_time": 6.0,
        "continuous_static": False,
    },
    "sim": {"dt": 1e-3, "duration": None},
    "profile": {
        "height": None,  # None: robot com_height
        "segments": [[10.0, 0.0, "stand"], [10.0, 0.3, "trot"], [10.0, 0.6, "trot"]],
    },
    "scenarios": [
        {"id": "sc1", "frequency": 0.33, "static": 0.0, "amplitude": 15.0},
        {"id": "sc2", "frequency": 0.33, "static": 0.0, "amplitude": 10.0},
        {"id": "sc3", "frequency": 0.33, "static": -10.0, "amplitude": 0.0},
        {"id": "sc4", "frequency": 0.33, "static": -7.0, "amplitude": 10.0},
        {"id": "sc5", "frequency": 0.33, "static": -10.0, "amplitude": 15.0},
        {"id": "sc6", "frequency": 0.5, "static": -10.0, "amplitude": 15.0},
    ],
}


@dataclass
class ScenarioConfig:
    """Everything one episode needs: disturbance, profile, gaits and the shared configs."""

    scenario_id: str
    disturbance: DisturbanceSpec
    profile: VelocityProfile
    gaits: dict
    robot: RobotParams
    mpc: MpcWeights
    estimator: EstimatorConfig
    sim: SimConfig
    qp_tol: float = 1e-8
    seed: int = 0

    @property
    def duration(self) -> float:
        if self.sim.duration is not None:
            return self.sim.duration
        return self.profile.duration

    @property
    def d_static_scalar(self) -> float:
        """Signed stationary component along the disturbance axis."""
        axis = self.disturbance.axis
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            return 0.0
        return float(self.disturbance.d_static @ (axis / norm))


def _merge(base, override):
    if not isinstance(override, dict) or not isinstance(base, dict):
        return copy.deepcopy(override)
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key in out:
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _build_gaits(section) -> dict:
    return {
        "stand": stand_gait(period=section["stand"].get("period", 0.6)),
        "trot": trot_gait(
            period=section["trot"].get("period", 0.6),
            duty_factor=section["trot"].get("duty_factor", 0.5),
        ),
    }


def _build_estimator(section, dt_mpc: float) -> EstimatorConfig:
    thr_f = section.get("amp_threshold_force", 1.0)
    thr_t = section.get("amp_threshold_torque", 0.1)
    kwargs = {
        "window": section["window"],
        "dt": section.get("dt", dt_mpc),
        "f_min": section["f_min"],
        "f_max": section["f_max"],
        "df": section["df"],
        "min_amplitude": [thr_f] * 3 + [thr_t] * 3,
        "refit_interval": section["refit_interval"],
        "static_freeze_time": section["static_freeze_time"],
        "continuous_static": section["continuous_static"],
    }
    if "weight_diag" in section:
        kwargs["weight"] = np.diag(section["weight_diag"])
    return EstimatorConfig(**kwargs)


def _build_scenario(entry, shared) -> ScenarioConfig:
    robot, gaits, weights, estimator, sim_cfg, profile, qp_tol = shared
    axis = np.asarray(entry.get("axis", [1.0, 0.0, 0.0]), dtype=float)
    static = entry.get("static", 0.0)
    d_static = entry.get("d_static")
    if d_static is None:
        norm = np.linalg.norm(axis)
        d_static = static * axis / (norm if norm > 0 else 1.0)
    disturbance = DisturbanceSpec(
        d_static=d_static,
        amplitude=entry.get("amplitude", 0.0),
        frequency=entry.get("frequency", 0.0),
        axis=axis,
    )
    if "profile" in entry:
        profile = _build_profile(entry["profile"], robot, gaits)
    return ScenarioConfig(
        scenario_id=str(entry["id"]),
        disturbance=disturbance,
        profile=profile,
        gaits=gaits,
        robot=robot,
        mpc=weights,
        estimator=estimator,
        sim=sim_cfg,
        qp_tol=qp_tol,
        seed=int(entry.get("seed", 0)),
    )


def _build_profile(section, robot: RobotParams, gaits: dict) -> VelocityProfile:
    height = section.get("height")
    if height is None:
        height = robot.com_height
    profile = VelocityProfile(section["segments"], height=height)
    for seg in profile.segments:
        if seg.gait not in gaits:
            raise ConfigParseError(f"profile names unknown gait {seg.gait!r}")
    return profile


def build_scenarios(raw: dict) -> list:
    """ScenarioConfig list from a fully merged config dict."""
    try:
        robot = RobotParams(
            mass=raw["robot"]["mass"],
            inertia_diag=raw["robot"]["inertia_diag"],
            mu=raw["robot"]["mu"],
            fz_min=raw["robot"]["fz_min"],
            fz_max=raw["robot"]["fz_max"],
            gravity=raw["robot"]["gravity"],
            hip_offsets=raw["robot"]["hip_offsets"],
            com_height=raw["robot"]["com_height"],
        )
        if robot.mu <= 0.0:
            raise ConfigParseError("mu must be positive")
        if not 0.0 <= robot.fz_min < robot.fz_max:
            raise ConfigParseError("need 0 <= fz_min < fz_max")
        gaits = _build_gaits(raw["gait"])
        weights = MpcWeights(
            p_diag=raw["mpc"]["p_diag"],
            r_control=raw["mpc"]["r_control"],
            horizon=raw["mpc"]["horizon"],
            dt=raw["mpc"]["dt"],
        )
        estimator = _build_estimator(raw["estimator"], weights.dt)
        sim_cfg = SimConfig(dt=raw["sim"]["dt"], duration=raw["sim"]["duration"])
        profile = _build_profile(raw["profile"], robot, gaits)
        qp_tol = float(raw["mpc"].get("qp_tol", 1e-8))
        shared = (robot, gaits, weights, estimator, sim_cfg, profile, qp_tol)
        return [_build_scenario(entry, shared) for entry in raw["scenarios"]]
    except ConfigParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigParseError(f"invalid configuration: {exc}") from exc


def load_config(path) -> list:
    """Parse a JSON config file into ScenarioConfig objects."""
    try:
        with open(path) as fh:
            user = json.load(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigParseError("config root must be a JSON object")
    merged = _merge(DEFAULT_CONFIG, user)
    if "scenarios" in user:
        merged["scenarios"] = user["scenarios"]
    return build_scenarios(merged)


def default_scenarios() -> list:
    return build_scenarios(copy.deepcopy(DEFAULT_CONFIG))
