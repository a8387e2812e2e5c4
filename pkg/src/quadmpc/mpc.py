"""Condensed force-level MPC over ground reaction forces.

Horizon dynamics are forward-substituted so the quadratic program decides
only the stacked stance-foot forces; swing feet never enter the problem.
The per-foot inequality rows realize the friction pyramid |f_x| <= mu f_z,
|f_y| <= mu f_z and the vertical force bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    N_LEGS,
    N_STATES,
    N_XI,
    DiscreteModel,
    RobotParams,
    State,
    build_discrete_model,
)
from .errors import DimensionMismatch, InfeasibleBounds
from .gait import ContactPlan


def _default_p_diag():
    # (theta, p, omega, v) blocks.
    return np.array([100.0, 100.0, 100.0, 100.0, 100.0, 200.0, 1.0, 1.0, 1.0, 10.0, 10.0, 10.0])


@dataclass
class MpcWeights:
    """Diagonal state weight, control-effort weight, horizon length and step."""

    p_diag: np.ndarray = field(default_factory=_default_p_diag)
    r_control: float = 1e-4
    horizon: int = 10
    dt: float = 0.03

    def __post_init__(self):
        self.p_diag = np.asarray(self.p_diag, dtype=float)
        if self.p_diag.shape != (N_STATES,):
            raise DimensionMismatch("p_diag must have 12 entries")
        if np.any(self.p_diag < 0.0):
            raise ValueError("state weights must be nonnegative")
        r = np.asarray(self.r_control, dtype=float)
        if r.ndim not in (0, 1) or (r.ndim == 1 and r.shape != (3,)):
            raise DimensionMismatch("r_control must be a scalar or a per-axis 3-vector")
        if np.any(r <= 0.0):
            raise ValueError("control-effort weight must be positive")
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1, got {self.horizon}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    def r_vector(self, n_vars: int) -> np.ndarray:
        r = np.asarray(self.r_control, dtype=float)
        if r.ndim == 0:
            return np.full(n_vars, float(r))
        return np.tile(r, n_vars // 3)


@dataclass
class ReferenceTrajectory:
    """Desired states for horizon steps 1..k, shape (k, 12)."""

    states: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[1] != N_STATES:
            raise DimensionMismatch("reference states must have shape (k, 12)")

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass
class QpProblem:
    """min 0.5 u' H u + q' u  s.t.  lower <= A_ineq u <= upper.

    index_map sends (horizon_step, leg) to the column slice of that foot's
    force; only stance feet appear.
    """

    H: np.ndarray
    q: np.ndarray
    A_ineq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    index_map: dict

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def objective(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(0.5 * u @ self.H @ u + self.q @ u)


@dataclass
class QpSolution:
    u: np.ndarray
    converged: bool
    iterations: int
    active_set: list
    stationarity: float
    primal_violation: float
    complementarity: float


def build_qp(
    x0: State,
    ref: ReferenceTrajectory,
    plan: ContactPlan,
    models,
    weights: MpcWeights,
    params: RobotParams,
    xi_forecast=None,
) -> QpProblem:
    """Condense the horizon into a dense QP over stacked stance forces.

    xi_forecast, when given, is a (k, 6) array of predicted disturbances;
    each row enters the affine part of that step's dynamics through Q_d.
    With no stance foot anywhere in the horizon this returns the
    zero-variable problem (empty solution).
    """
    k = weights.horizon
    if len(models) != k or plan.horizon != k or len(ref) != k:
        raise DimensionMismatch(
            f"horizon mismatch: weights {k}, models {len(models)}, "
            f"plan {plan.horizon}, ref {len(ref)}"
        )
    if xi_forecast is not None:
        xi_forecast = np.asarray(xi_forecast, dtype=float)
        if xi_forecast.shape != (k, N_XI):
            raise DimensionMismatch(f"xi_forecast must have shape ({k}, 6)")

    # Column layout: step-major, legs in (FL, FR, RL, RR) order within a step.
    index_map = {}
    step_start = []
    col = 0
    for i in range(k):
        step_start.append(col)
        for leg in range(N_LEGS):
            if plan.stance[i, leg]:
                index_map[(i, leg)] = slice(col, col + 3)
                col += 3
    n = col

    # Forward substitution: running holds the control-free state, sens the
    # sensitivity of x_{i+1} to the stacked forces.
    p_full = np.tile(weights.p_diag, k)
    F = np.zeros((N_STATES * k, n))
    d = np.zeros(N_STATES * k)
    running = x0.to_vector()
    sens = np.zeros((N_STATES, n))
    for i in range(k):
        m = models[i]
        width = 3 * m.contact_count
        if width != int(plan.stance[i].sum()) * 3:
            raise DimensionMismatch(f"model at step {i} disagrees with the contact plan")
        w = m.G_d.copy()
        if xi_forecast is not None:
            w = w + m.Q_d @ xi_forecast[i]
        sens = m.A_d @ sens
        if width > 0:
            sens[:, step_start[i] : step_start[i] + width] += m.B_d
        running = m.A_d @ running + w
        F[N_STATES * i : N_STATES * (i + 1)] = sens
        d[N_STATES * i : N_STATES * (i + 1)] = running

    err = d - ref.states.reshape(-1)
    pf = p_full[:, None] * F
    H = 2.0 * (F.T @ pf)
    H[np.diag_indices(n)] += 2.0 * weights.r_vector(n)
    H = 0.5 * (H + H.T)
    q = 2.0 * (pf.T @ err)

    # Friction pyramid and vertical bounds, per stance foot per step.
    mu = params.mu
    n_rows = 5 * len(index_map)
    A_ineq = np.zeros((n_rows, n))
    lower = np.zeros(n_rows)
    upper = np.zeros(n_rows)
    row = 0
    for (i, leg), sl in index_map.items():
        fx, fy, fz = sl.start, sl.start + 1, sl.start + 2
        A_ineq[row, fx] = 1.0
        A_ineq[row, fz] = -mu
        lower[row], upper[row] = -np.inf, 0.0  # f_x - mu f_z <= 0
        A_ineq[row + 1, fx] = 1.0
        A_ineq[row + 1, fz] = mu
        lower[row + 1], upper[row + 1] = 0.0, np.inf  # f_x + mu f_z >= 0
        A_ineq[row + 2, fy] = 1.0
        A_ineq[row + 2, fz] = -mu
        lower[row + 2], upper[row + 2] = -np.inf, 0.0
        A_ineq[row + 3, fy] = 1.0
        A_ineq[row + 3, fz] = mu
        lower[row + 3], upper[row + 3] = 0.0, np.inf
        A_ineq[row + 4, fz] = 1.0
        lower[row + 4], upper[row + 4] = params.fz_min, params.fz_max
        row += 5

    return QpProblem(H, q, A_ineq, lower, upper, index_map)


def solve_qp(problem: QpProblem, tol: float = 1e-8, max_iter: int = 200) -> QpSolution:
    """Deterministic active-set solve of the strictly convex QP.

    Starts from the unconstrained minimizer and repeatedly activates the
    most violated one-sided constraint, dropping working-set rows whose
    multiplier turns negative.  On hitting max_iter the best iterate is
    returned flagged non-converged rather than raising.
    """
    n = problem.n
    n_rows = 0 if problem.A_ineq is None else problem.A_ineq.shape[0]
    if n_rows and np.any(problem.lower > problem.upper):
        bad = int(np.argmax(problem.lower > problem.upper))
        raise InfeasibleBounds(
            f"row {bad}: lower {problem.lower[bad]} > upper {problem.upper[bad]}"
        )
    if n == 0:
        return QpSolution(np.zeros(0), True, 0, [], 0.0, 0.0, 0.0)

    H, q = problem.H, problem.q
    # One-sided form a.u <= b; each finite bound of a row contributes one entry.
    a_rows = []
    b_vals = []
    for j in range(n_rows):
        if np.isfinite(problem.upper[j]):
            a_rows.append(problem.A_ineq[j])
            b_vals.append(problem.upper[j])
        if np.isfinite(problem.lower[j]):
            a_rows.append(-problem.A_ineq[j])
            b_vals.append(-problem.lower[j])

    u_free = -np.linalg.solve(H, q)
    if not a_rows:
        return QpSolution(u_free, True, 0, [], _stationarity(H, q, u_free), 0.0, 0.0)

    A1 = np.vstack(a_rows)
    b1 = np.asarray(b_vals)
    m1 = A1.shape[0]
    X = None  # H^{-1} A1', factored lazily on the first activation

    # Dual active-set walk: start at the unconstrained minimizer (dual
    # feasible, primal infeasible) and work violated rows in one at a
    # time, taking the shorter of the full primal step and the step at
    # which some active multiplier hits zero (that row then leaves).
    # Strict convexity of H makes this terminate; every choice below
    # breaks ties by lowest index, keeping the solve deterministic.
    u = u_free.copy()
    active: list[int] = []
    lam_active: list[float] = []
    converged = False
    iters = 0
    while iters < max_iter:
        iters += 1
        viol = A1 @ u - b1
        if active:
            viol[active] = -np.inf
        p = int(np.argmax(viol))
        if viol[p] <= tol:
            converged = True
            break
        if X is None:
            X = np.linalg.solve(H, A1.T)

        lam_p = 0.0
        while iters < max_iter:
            hinv_a = X[:, p]
            if active:
                idx = np.array(active)
                x_w = X[:, idx]
                m_w = A1[idx] @ x_w
                r = np.linalg.solve(m_w, A1[idx] @ hinv_a)
                z = hinv_a - x_w @ r
            else:
                r = np.zeros(0)
                z = hinv_a

            gap = float(A1[p] @ u - b1[p])
            denom = float(A1[p] @ z)
            t_primal = gap / denom if denom > 1e-14 else np.inf
            t_dual = np.inf
            drop_j = -1
            for j in range(len(active)):
                if r[j] > 1e-14:
                    step_j = lam_active[j] / r[j]
                    if step_j < t_dual:
                        t_dual, drop_j = step_j, j
            t = min(t_primal, t_dual)
            if not np.isfinite(t):
                # violated row is inconsistent with the active set
                break
            u -= t * z
            lam_p += t
            lam_active = [l - t * rj for l, rj in zip(lam_active, r)]
            if t_primal <= t_dual:
                active.append(p)
                lam_active.append(lam_p)
                break
            del active[drop_j]
            del lam_active[drop_j]
            iters += 1

    # Final polish: re-solve the equality system on the last working set so
    # the reported iterate carries no accumulated drift.
    lam_full = np.zeros(m1)
    if active:
        idx = np.array(active)
        x_w = X[:, idx]
        m_w = A1[idx] @ x_w
        lam = np.linalg.solve(m_w, A1[idx] @ u_free - b1[idx])
        if np.all(lam >= -tol):
            u = u_free - x_w @ lam
            lam_full[idx] = np.maximum(lam, 0.0)
        else:
            lam_full[idx] = np.maximum(lam_active, 0.0)
    else:
        u = u_free.copy()

    viol = A1 @ u - b1
    primal = float(max(0.0, float(viol.max())))
    stat = _stationarity(H, q, u, A1, lam_full)
    comp = float(np.max(np.abs(lam_full * viol)))
    if primal > tol:
        converged = False
    return QpSolution(u, converged, iters, list(active), stat, primal, comp)


def _stationarity(H, q, u, A1=None, lam=None) -> float:
    g = H @ u + q
    if A1 is not None:
        g = g + A1.T @ lam
    return float(np.max(np.abs(g))) if g.size else 0.0


@dataclass
class MpcStepResult:
    """First-step command plus the pieces the residual estimator needs."""

    foot_forces: np.ndarray  # (4, 3), zeros for swing feet
    u_stack: np.ndarray  # stacked stance forces of step 0
    model: DiscreteModel  # step-0 model that produced u_stack
    solution: QpSolution


def mpc_step(
    x: State,
    ref: ReferenceTrajectory,
    plan: ContactPlan,
    weights: MpcWeights,
    params: RobotParams,
    xi_forecast=None,
    tol: float = 1e-8,
) -> MpcStepResult:
    """Build the horizon models, solve the condensed QP, scatter step 0."""
    models = [
        build_discrete_model(params, x.theta, plan.contacts_at(i), weights.dt)
        for i in range(plan.horizon)
    ]
    problem = build_qp(x, ref, plan, models, weights, params, xi_forecast)
    sol = solve_qp(problem, tol=tol)

    forces = np.zeros((N_LEGS, 3))
    for (i, leg), sl in problem.index_map.items():
        if i == 0:
            forces[leg] = sol.u[sl]
    n0 = 3 * models[0].contact_count
    return MpcStepResult(forces, sol.u[:n0].copy(), models[0], sol)
