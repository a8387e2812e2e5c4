"""Ground-truth trunk simulator and the closed-loop episode runner.

The truth model keeps what the controller's linear model drops: the
gyroscopic term and the exact Euler-rate transform.  Integration is
semi-implicit Euler (velocities first, then pose with the new velocities)
with the commanded forces held between control updates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dynamics import N_LEGS, N_STATES, N_XI, RobotParams, State, euler_rate_transform, skew
from .errors import DimensionMismatch, NumericalBlowup
from .estimator import XI_COLUMNS, DisturbancePolicy, estimate_instant
from .gait import ContactPlan, plan_footholds, schedule_contacts
from .mpc import mpc_step
from .reference import generate_reference, reference_state

BLOWUP_LIMIT = 1e6

STATE_COLUMNS = ("roll", "pitch", "yaw", "px", "py", "pz", "wx", "wy", "wz", "vx", "vy", "vz")
GRF_COLUMNS = tuple(f"{leg}_{ax}" for leg in ("fl", "fr", "rl", "rr") for ax in ("fx", "fy", "fz"))
DIST_COLUMNS = ("dist_x", "dist_y", "dist_z")
LOG_HEADER = (
    ("t",)
    + STATE_COLUMNS
    + tuple(f"ref_{c}" for c in STATE_COLUMNS)
    + GRF_COLUMNS
    + DIST_COLUMNS
    + XI_COLUMNS
    + ("failed",)
)


def _default_axis():
    return np.array([1.0, 0.0, 0.0])


@dataclass
class DisturbanceSpec:
    """Applied external force d_static + amplitude * sin(2 pi f t) * axis."""

    d_static: np.ndarray = field(default_factory=lambda: np.zeros(3))
    amplitude: float = 0.0
    frequency: float = 0.0
    axis: np.ndarray = field(default_factory=_default_axis)

    def __post_init__(self):
        self.d_static = np.asarray(self.d_static, dtype=float)
        self.axis = np.asarray(self.axis, dtype=float)
        if self.d_static.shape != (3,) or self.axis.shape != (3,):
            raise DimensionMismatch("d_static and axis must be 3-vectors")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be nonnegative")
        if self.amplitude > 0.0:
            if self.frequency <= 0.0:
                raise ValueError("a sinusoidal component needs a positive frequency")
            norm = np.linalg.norm(self.axis)
            if norm == 0.0:
                raise ValueError("axis must be nonzero")
            self.axis = self.axis / norm


def apply_disturbance(spec: DisturbanceSpec, t: float) -> np.ndarray:
    """World-frame external force at the CoM at time t."""
    force = spec.d_static.copy()
    if spec.amplitude > 0.0:
        force = force + spec.amplitude * np.sin(2.0 * np.pi * spec.frequency * t) * spec.axis
    return force


def step_truth(
    x: State,
    foot_forces,
    footholds,
    ext_force,
    params: RobotParams,
    dt_sim: float,
    gyroscopic: bool = True,
) -> State:
    """One semi-implicit Euler step of the nonlinear trunk model.

    Swing feet must carry zero force; they then drop out of both sums.
    The gyroscopic flag exists so tests can strip the truth model down to
    the controller's simplifications.
    """
    if dt_sim <= 0.0 or dt_sim > 1e-3 + 1e-12:
        raise ValueError(f"dt_sim must lie in (0, 1e-3], got {dt_sim}")
    foot_forces = np.asarray(foot_forces, dtype=float)
    footholds = np.asarray(footholds, dtype=float)
    if foot_forces.shape != (N_LEGS, 3) or footholds.shape != (N_LEGS, 3):
        raise DimensionMismatch("foot_forces and footholds must have shape (4, 3)")
    ext_force = np.asarray(ext_force, dtype=float)

    inertia = params.inertia_diag
    f_total = foot_forces.sum(axis=0) + ext_force
    torque = np.cross(footholds - x.p[None, :], foot_forces).sum(axis=0)
    if gyroscopic:
        torque = torque - np.cross(x.omega, inertia * x.omega)

    v_new = x.v + dt_sim * (params.gravity + f_total / params.mass)
    w_new = x.omega + dt_sim * (torque / inertia)
    p_new = x.p + dt_sim * v_new
    theta_new = x.theta + dt_sim * (euler_rate_transform(x.theta) @ w_new)

    out = State(theta_new, p_new, w_new, v_new)
    if np.max(np.abs(out.to_vector())) > BLOWUP_LIMIT:
        raise NumericalBlowup(f"state magnitude exceeded {BLOWUP_LIMIT:g}")
    return out


@dataclass
class SimConfig:
    dt: float = 1e-3
    duration: float | None = None  # None: run the full velocity profile

    def __post_init__(self):
        if self.dt <= 0.0 or self.dt > 1e-3 + 1e-12:
            raise ValueError(f"dt must lie in (0, 1e-3], got {self.dt}")


@dataclass
class TrajectoryLog:
    """Uniformly sampled closed-loop record, one row per control step."""

    t: np.ndarray
    states: np.ndarray  # (N, 12)
    refs: np.ndarray  # (N, 12)
    grfs: np.ndarray  # (N, 12) per-foot forces, leg-major
    disturbances: np.ndarray  # (N, 3) applied external force at the log instant
    xi: np.ndarray  # (N, 6) instantaneous estimates
    flags: np.ndarray  # (N,) 1 from the first failed step onward

    @property
    def failed(self) -> bool:
        return bool(self.flags.any())

    def __len__(self) -> int:
        return self.t.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LOG_HEADER)
            for i in range(len(self)):
                row = (
                    [self.t[i]]
                    + list(self.states[i])
                    + list(self.refs[i])
                    + list(self.grfs[i])
                    + list(self.disturbances[i])
                    + list(self.xi[i])
                )
                writer.writerow([f"{v:.17g}" for v in row] + [int(self.flags[i])])

    @classmethod
    def from_csv(cls, path) -> "TrajectoryLog":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != LOG_HEADER:
                raise DimensionMismatch(f"unexpected episode header in {path}")
            data = np.array([[float(v) for v in row] for row in reader])
        if data.size == 0:
            data = data.reshape(0, len(LOG_HEADER))
        return cls(
            t=data[:, 0],
            states=data[:, 1:13],
            refs=data[:, 13:25],
            grfs=data[:, 25:37],
            disturbances=data[:, 37:40],
            xi=data[:, 40:46],
            flags=data[:, 46].astype(int),
        )


def initial_state(params: RobotParams) -> State:
    return State(np.zeros(3), np.array([0.0, 0.0, params.com_height]), np.zeros(3), np.zeros(3))


def initial_footholds(params: RobotParams, x: State) -> np.ndarray:
    feet = x.p[None, :] + params.hip_offsets.copy()
    feet[:, 2] = 0.0
    return feet


def run_episode(scenario, mode: str) -> TrajectoryLog:
    """Close the loop for one scenario and compensation mode.

    Per control step: fold the last transition into the residual window
    using the model that produced it, refit on cadence, plan contacts and
    references, solve the MPC with the mode's forecast, then substep the
    truth model under the held command.
    """
    params = scenario.robot
    weights = scenario.mpc
    dt_mpc = weights.dt
    n_sub = int(round(dt_mpc / scenario.sim.dt))
    if abs(n_sub * scenario.sim.dt - dt_mpc) > 1e-9 or n_sub < 1:
        raise ValueError(f"dt_mpc = {dt_mpc} is not a multiple of dt_sim = {scenario.sim.dt}")
    duration = scenario.duration
    n_steps = int(round(duration / dt_mpc))
    k = weights.horizon

    policy = DisturbancePolicy(scenario.estimator, mode)
    x = initial_state(params)
    footholds = initial_footholds(params, x)
    stance_now = np.ones(N_LEGS, dtype=bool)
    prev = None  # (t, state, u_stack, model)

    t_rows = []
    state_rows = []
    ref_rows = []
    grf_rows = []
    dist_rows = []
    xi_rows = []
    flag_rows = []

    for step in range(n_steps):
        t = step * dt_mpc
        xi_inst = np.zeros(N_XI)
        if prev is not None:
            t_prev, x_prev, u_prev, model_prev = prev
            est = estimate_instant(x, x_prev, u_prev, model_prev, scenario.estimator.weight)
            xi_inst = est.to_vector()
            policy.ingest(t_prev, xi_inst)
        policy.update(t)

        gait = scenario.gaits[scenario.profile.gait_at(min(t, scenario.profile.duration))]
        stance_table = schedule_contacts(gait, t, k, dt_mpc)
        v_cmd = np.array([scenario.profile.velocity_at(t), 0.0, 0.0])
        targets = plan_footholds(x, v_cmd, gait, params)
        for leg in range(N_LEGS):
            if stance_table[0, leg] and not stance_now[leg]:
                footholds[leg] = targets[leg]
        stance_now = stance_table[0].copy()

        # Feet keep their planted position while continuously in stance;
        # any later touchdown within the horizon uses today's target.
        foot_r = np.zeros((k, N_LEGS, 3))
        for leg in range(N_LEGS):
            planted = True
            for i in range(k):
                if not stance_table[i, leg]:
                    planted = False
                    continue
                hold = footholds[leg] if planted else targets[leg]
                foot_r[i, leg] = hold - x.p
        plan = ContactPlan(stance_table, foot_r)

        ref = generate_reference(scenario.profile, min(t, scenario.profile.duration), k, dt_mpc)
        xi_fc = policy.horizon_forecast(t, k, dt_mpc)
        result = mpc_step(x, ref, plan, weights, params, xi_fc, tol=scenario.qp_tol)

        failed_here = not result.solution.converged
        t_rows.append(t)
        state_rows.append(x.to_vector())
        ref_rows.append(reference_state(scenario.profile, min(t, scenario.profile.duration)))
        grf_rows.append(result.foot_forces.reshape(-1).copy())
        dist_rows.append(apply_disturbance(scenario.disturbance, t))
        xi_rows.append(xi_inst)

        x_before = x
        try:
            for j in range(n_sub):
                ext = apply_disturbance(scenario.disturbance, t + j * scenario.sim.dt)
                x = step_truth(x, result.foot_forces, footholds, ext, params, scenario.sim.dt)
        except NumericalBlowup:
            flag_rows.append(1)
            break
        flag_rows.append(int(failed_here))
        prev = (t, x_before, result.u_stack, result.model)

    flags = np.array(flag_rows, dtype=int)
    if flags.size:
        flags = np.maximum.accumulate(flags)
    return TrajectoryLog(
        t=np.array(t_rows),
        states=np.array(state_rows).reshape(len(t_rows), N_STATES),
        refs=np.array(ref_rows).reshape(len(t_rows), N_STATES),
        grfs=np.array(grf_rows).reshape(len(t_rows), 12),
        disturbances=np.array(dist_rows).reshape(len(t_rows), 3),
        xi=np.array(xi_rows).reshape(len(t_rows), N_XI),
        flags=flags,
    )
