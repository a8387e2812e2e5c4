"""Contact scheduling and foothold planning for the force-level controller."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import N_LEGS, RobotParams, State
from .errors import DimensionMismatch

LEG_ORDER = ("FL", "FR", "RL", "RR")
REACH_RADIUS = 0.15  # m, clamp on the touchdown shift away from the hip projection


@dataclass
class GaitSpec:
    """Periodic stance pattern: a leg is in stance while its phase is below duty_factor."""

    kind: str
    period: float
    duty_factor: float
    phase_offsets: np.ndarray

    def __post_init__(self):
        self.phase_offsets = np.asarray(self.phase_offsets, dtype=float)
        if self.phase_offsets.shape != (N_LEGS,):
            raise DimensionMismatch("phase_offsets must have one entry per leg")
        if self.period <= 0.0:
            raise ValueError(f"gait period must be positive, got {self.period}")
        if not 0.0 < self.duty_factor <= 1.0:
            raise ValueError(f"duty_factor must lie in (0, 1], got {self.duty_factor}")
        if self.kind == "stand" and self.duty_factor != 1.0:
            raise ValueError("stand gait keeps every foot planted: duty_factor must be 1")
        if self.kind == "trot":
            off = self.phase_offsets
            pairs_match = off[0] == off[3] and off[1] == off[2]
            if not pairs_match or abs((off[1] - off[0]) % 1.0 - 0.5) > 1e-12:
                raise ValueError("trot needs diagonal pairs half a cycle apart")


def stand_gait(period: float = 0.6) -> GaitSpec:
    return GaitSpec("stand", period, 1.0, np.zeros(N_LEGS))


def trot_gait(period: float = 0.6, duty_factor: float = 0.5) -> GaitSpec:
    # Diagonal pairs (FL, RR) and (FR, RL) half a cycle apart.
    return GaitSpec("trot", period, duty_factor, np.array([0.0, 0.5, 0.5, 0.0]))


def schedule_contacts(gait: GaitSpec, t: float, k: int, dt_mpc: float) -> np.ndarray:
    """Boolean stance table of shape (k, 4) for horizon steps starting at time t."""
    if k < 1:
        raise ValueError(f"horizon must be at least 1, got {k}")
    if dt_mpc <= 0.0:
        raise ValueError(f"dt_mpc must be positive, got {dt_mpc}")
    times = t + np.arange(k) * dt_mpc
    phase = np.mod(times[:, None] / gait.period + gait.phase_offsets[None, :], 1.0)
    return phase < gait.duty_factor


def plan_footholds(state: State, v_cmd, gait: GaitSpec, params: RobotParams) -> np.ndarray:
    """Touchdown targets on the ground plane, one row per leg.

    Each target sits under the yaw-rotated hip, shifted by half a stance
    interval of travel at the measured CoM velocity; the shift is clamped
    to the leg reach.  v_cmd is accepted for signature stability but the
    heuristic keys on the measured velocity.
    """
    yaw = state.theta[2]
    cy, sy = np.cos(yaw), np.sin(yaw)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])

    t_stance = gait.duty_factor * gait.period
    shift = state.v * (t_stance / 2.0)
    shift[2] = 0.0
    norm = np.linalg.norm(shift)
    if norm > REACH_RADIUS:
        shift = shift * (REACH_RADIUS / norm)

    feet = state.p[None, :] + params.hip_offsets @ rz.T
    feet[:, 2] = 0.0
    return feet + shift[None, :]


def relative_foot_vectors(footholds, p_com) -> np.ndarray:
    """r_i = foothold_i - p_com, both in the world frame."""
    footholds = np.asarray(footholds, dtype=float)
    p_com = np.asarray(p_com, dtype=float)
    if footholds.shape != (N_LEGS, 3) or p_com.shape != (3,):
        raise DimensionMismatch("expected footholds (4, 3) and p_com (3,)")
    return footholds - p_com[None, :]


@dataclass
class ContactPlan:
    """Stance flags and CoM-relative foot positions over the horizon.

    stance has shape (k, 4); foot_r has shape (k, 4, 3) with rows for swing
    feet left untouched by the controller.
    """

    stance: np.ndarray
    foot_r: np.ndarray

    def __post_init__(self):
        self.stance = np.asarray(self.stance, dtype=bool)
        self.foot_r = np.asarray(self.foot_r, dtype=float)
        if self.stance.ndim != 2 or self.stance.shape[1] != N_LEGS:
            raise DimensionMismatch("stance must have shape (k, 4)")
        if self.foot_r.shape != self.stance.shape + (3,):
            raise DimensionMismatch("foot_r must have shape (k, 4, 3)")

    @property
    def horizon(self) -> int:
        return self.stance.shape[0]

    def contacts_at(self, i: int):
        """(stance_flag, r) pairs for horizon step i, in leg order."""
        return [(bool(self.stance[i, leg]), self.foot_r[i, leg]) for leg in range(N_LEGS)]
