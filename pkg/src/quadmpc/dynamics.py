"""Floating-base trunk model and its discrete-time linear form.

The trunk is a single rigid body with diagonal inertia, driven by ground
reaction forces at point feet plus an unknown external wrench.  State
ordering is [theta, p, omega, v]: ZYX Euler angles (roll, pitch, yaw),
world-frame CoM position, body angular velocity and world-frame CoM
velocity.  Foot forces are expressed in the world frame throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, GimbalLock, InvalidTimestep, SingularInertia

N_STATES = 12
N_LEGS = 4
N_XI = 6

# Index blocks of the 12-dim state vector.
IDX_THETA = slice(0, 3)
IDX_P = slice(3, 6)
IDX_OMEGA = slice(6, 9)
IDX_V = slice(9, 12)

PITCH_MARGIN = 1e-3  # rad of clearance kept from the |pitch| = pi/2 singularity


def _vec3(x, name="vector"):
    a = np.asarray(x, dtype=float)
    if a.shape != (3,):
        raise DimensionMismatch(f"{name} must be a 3-vector, got shape {a.shape}")
    return a


@dataclass
class State:
    """Trunk state with named blocks; converts to and from the stacked 12-vector."""

    theta: np.ndarray
    p: np.ndarray
    omega: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.theta = _vec3(self.theta, "theta")
        self.p = _vec3(self.p, "p")
        self.omega = _vec3(self.omega, "omega")
        self.v = _vec3(self.v, "v")

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.theta, self.p, self.omega, self.v])

    @classmethod
    def from_vector(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        if x.shape != (N_STATES,):
            raise DimensionMismatch(f"state vector must have shape (12,), got {x.shape}")
        return cls(x[IDX_THETA].copy(), x[IDX_P].copy(), x[IDX_OMEGA].copy(), x[IDX_V].copy())

    def copy(self) -> "State":
        return State(self.theta.copy(), self.p.copy(), self.omega.copy(), self.v.copy())


def _default_inertia():
    return np.array([0.07, 0.26, 0.24])


def _default_gravity():
    return np.array([0.0, 0.0, -9.81])


def _default_hip_offsets():
    # FL, FR, RL, RR; z is the nominal foot drop below the CoM.
    return np.array(
        [
            [0.18, 0.13, -0.28],
            [0.18, -0.13, -0.28],
            [-0.18, 0.13, -0.28],
            [-0.18, -0.13, -0.28],
        ]
    )


@dataclass
class RobotParams:
    """Trunk and contact parameters.

    inertia_diag is the body-frame inertia diagonal; at the small roll/pitch
    angles this controller operates in, the world-frame inertia is taken
    equal to it.  hip_offsets are nominal foot positions relative to the CoM,
    ordered FL, FR, RL, RR.
    """

    mass: float = 12.0
    inertia_diag: np.ndarray = field(default_factory=_default_inertia)
    mu: float = 0.6
    fz_min: float = 0.0
    fz_max: float = 250.0
    gravity: np.ndarray = field(default_factory=_default_gravity)
    hip_offsets: np.ndarray = field(default_factory=_default_hip_offsets)
    com_height: float = 0.28

    def __post_init__(self):
        self.inertia_diag = _vec3(self.inertia_diag, "inertia_diag")
        self.gravity = _vec3(self.gravity, "gravity")
        self.hip_offsets = np.asarray(self.hip_offsets, dtype=float)
        if self.hip_offsets.shape != (N_LEGS, 3):
            raise DimensionMismatch(
                f"hip_offsets must have shape (4, 3), got {self.hip_offsets.shape}"
            )


@dataclass
class Disturbance:
    """Unknown external wrench: force and torque components of xi.

    Sign convention follows the model equations below: a positive f_unk
    entry removes momentum, i.e. x_next includes -dt/m * f_unk in the
    velocity rows.
    """

    f_unk: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t_unk: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.f_unk = _vec3(self.f_unk, "f_unk")
        self.t_unk = _vec3(self.t_unk, "t_unk")

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.f_unk, self.t_unk])

    @classmethod
    def from_vector(cls, xi) -> "Disturbance":
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (N_XI,):
            raise DimensionMismatch(f"xi must have shape (6,), got {xi.shape}")
        return cls(xi[:3].copy(), xi[3:].copy())


def euler_rate_transform(theta) -> np.ndarray:
    """T(theta) mapping body angular velocity to ZYX Euler-angle rates.

    thetadot = T(theta) @ omega.  Raises GimbalLock within PITCH_MARGIN of
    the pitch singularity.
    """
    theta = _vec3(theta, "theta")
    roll, pitch = theta[0], theta[1]
    if abs(pitch) >= np.pi / 2 - PITCH_MARGIN:
        raise GimbalLock(f"pitch {pitch:.6f} rad too close to the ZYX singularity")
    sr, cr = np.sin(roll), np.cos(roll)
    cp = np.cos(pitch)
    tp = np.tan(pitch)
    return np.array(
        [
            [1.0, sr * tp, cr * tp],
            [0.0, cr, -sr],
            [0.0, sr / cp, cr / cp],
        ]
    )


def rotation_world_body(theta) -> np.ndarray:
    """Body-to-world rotation R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    theta = _vec3(theta, "theta")
    sr, cr = np.sin(theta[0]), np.cos(theta[0])
    sp, cp = np.sin(theta[1]), np.cos(theta[1])
    sy, cy = np.sin(theta[2]), np.cos(theta[2])
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def skew(r) -> np.ndarray:
    """Cross-product matrix: skew(r) @ f == np.cross(r, f)."""
    r = _vec3(r, "r")
    return np.array(
        [
            [0.0, -r[2], r[1]],
            [r[2], 0.0, -r[0]],
            [-r[1], r[0], 0.0],
        ]
    )


@dataclass
class DiscreteModel:
    """One-step affine model x_next = A_d x + B_d u + G_d + Q_d xi.

    B_d has one 3-column block per stance foot, in the order the stance
    contacts were supplied.  Q_d maps the unknown wrench into the omega and
    v rows only.
    """

    A_d: np.ndarray
    B_d: np.ndarray
    G_d: np.ndarray
    Q_d: np.ndarray
    dt: float
    contact_count: int


def build_discrete_model(
    params: RobotParams,
    theta,
    contacts,
    dt: float,
    bare_identity_disturbance: bool = False,
) -> DiscreteModel:
    """Assemble the discrete matrices for one control step.

    contacts is a sequence of (stance_flag, r_i) pairs, r_i the world-frame
    foot position relative to the CoM.  Swing feet contribute no columns.
    bare_identity_disturbance swaps the physically scaled Q_d for a raw
    [0; I] block (comparison variant; units then live in the estimate).
    """
    if dt <= 0.0:
        raise InvalidTimestep(f"dt must be positive, got {dt}")
    inertia = np.asarray(params.inertia_diag, dtype=float)
    if inertia.shape != (3,) or np.any(inertia <= 0.0):
        raise SingularInertia(f"inertia diagonal must be positive, got {inertia}")

    T = euler_rate_transform(theta)
    A = np.eye(N_STATES)
    A[IDX_THETA, IDX_OMEGA] = T * dt
    A[IDX_P, IDX_V] = np.eye(3) * dt

    stance_r = [_vec3(r, "foot position") for flag, r in contacts if flag]
    n_c = len(stance_r)
    B = np.zeros((N_STATES, 3 * n_c))
    inv_inertia = np.diag(1.0 / inertia)
    for j, r in enumerate(stance_r):
        cols = slice(3 * j, 3 * j + 3)
        B[IDX_OMEGA, cols] = inv_inertia @ skew(r) * dt
        B[IDX_V, cols] = np.eye(3) * (dt / params.mass)

    G = np.zeros(N_STATES)
    G[IDX_V] = params.gravity * dt

    Q = np.zeros((N_STATES, N_XI))
    if bare_identity_disturbance:
        Q[6:12, :] = np.eye(N_XI)
    else:
        Q[IDX_V, 0:3] = -np.eye(3) * (dt / params.mass)
        Q[IDX_OMEGA, 3:6] = -inv_inertia * dt

    return DiscreteModel(A, B, G, Q, dt, n_c)


def predict_next_state(model: DiscreteModel, x: State, u=None, xi=None) -> State:
    """Exact evaluation of the affine one-step model."""
    if u is None:
        u = np.zeros(3 * model.contact_count)
    u = np.asarray(u, dtype=float)
    if u.shape != (3 * model.contact_count,):
        raise DimensionMismatch(
            f"u must have shape ({3 * model.contact_count},) for {model.contact_count} "
            f"stance feet, got {u.shape}"
        )
    if xi is None:
        xi_vec = np.zeros(N_XI)
    elif isinstance(xi, Disturbance):
        xi_vec = xi.to_vector()
    else:
        xi_vec = np.asarray(xi, dtype=float)
        if xi_vec.shape != (N_XI,):
            raise DimensionMismatch(f"xi must have shape (6,), got {xi_vec.shape}")

    x_next = model.A_d @ x.to_vector() + model.G_d + model.Q_d @ xi_vec
    if model.contact_count > 0:
        x_next = x_next + model.B_d @ u
    return State.from_vector(x_next)
