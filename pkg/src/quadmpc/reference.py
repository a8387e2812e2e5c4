"""Reference trajectories from piecewise-constant forward-velocity commands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import N_STATES
from .errors import TimeOutOfRange
from .mpc import ReferenceTrajectory


@dataclass
class ProfileSegment:
    duration: float
    vx: float
    gait: str = "trot"

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError(f"segment duration must be positive, got {self.duration}")


class VelocityProfile:
    """Piecewise-constant v_x command; position is its running integral.

    Queries past the final segment hold that segment's velocity so horizon
    tails near the episode end stay defined.
    """

    def __init__(self, segments, height: float = 0.28):
        self.segments = [s if isinstance(s, ProfileSegment) else ProfileSegment(*s) for s in segments]
        if not self.segments:
            raise ValueError("profile needs at least one segment")
        self.height = float(height)
        durations = np.array([s.duration for s in self.segments])
        self._t_breaks = np.concatenate([[0.0], np.cumsum(durations)])
        vels = np.array([s.vx for s in self.segments])
        self._x_breaks = np.concatenate([[0.0], np.cumsum(vels * durations)])

    @property
    def duration(self) -> float:
        return float(self._t_breaks[-1])

    def segment_index(self, t: float) -> int:
        if t < 0.0 or t > self.duration:
            raise TimeOutOfRange(f"t = {t} outside [0, {self.duration}]")
        idx = int(np.searchsorted(self._t_breaks, t, side="right")) - 1
        return min(idx, len(self.segments) - 1)

    def velocity_at(self, t: float) -> float:
        if t >= self.duration:
            return self.segments[-1].vx
        return self.segments[self.segment_index(max(t, 0.0))].vx

    def position_x_at(self, t: float) -> float:
        if t >= self.duration:
            return float(self._x_breaks[-1]) + self.segments[-1].vx * (t - self.duration)
        i = self.segment_index(max(t, 0.0))
        return float(self._x_breaks[i]) + self.segments[i].vx * (t - self._t_breaks[i])

    def gait_at(self, t: float) -> str:
        return self.segments[self.segment_index(t)].gait

    def boundaries(self) -> np.ndarray:
        return self._t_breaks[1:-1].copy()


def reference_state(profile: VelocityProfile, t: float) -> np.ndarray:
    """12-dim reference at time t: level attitude, integrated x, nominal height."""
    x = np.zeros(N_STATES)
    x[3] = profile.position_x_at(t)
    x[5] = profile.height
    x[9] = profile.velocity_at(t)
    return x


def generate_reference(
    profile: VelocityProfile,
    t: float,
    k: int,
    dt_mpc: float,
    current_p=None,
    current_yaw: float = 0.0,
) -> ReferenceTrajectory:
    """References for horizon steps 1..k starting at time t.

    Yaw is held at zero and lateral position at the track centreline; the
    current pose arguments are accepted for callers that want to anchor
    future turning references but do not shift the straight-line track.
    """
    if t < 0.0 or t > profile.duration:
        raise TimeOutOfRange(f"t = {t} outside [0, {profile.duration}]")
    rows = np.stack([reference_state(profile, t + (i + 1) * dt_mpc) for i in range(k)])
    return ReferenceTrajectory(rows)
