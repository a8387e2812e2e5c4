"""Convex force MPC for quadruped balance with online disturbance compensation."""

from .dynamics import (
    Disturbance,
    DiscreteModel,
    RobotParams,
    State,
    build_discrete_model,
    euler_rate_transform,
    predict_next_state,
    rotation_world_body,
)
from .errors import QuadmpcError
from .estimator import (
    DisturbancePolicy,
    EstimatorConfig,
    PeriodicModel,
    ResidualHistory,
    estimate_instant,
    fit_periodic,
    fit_static,
    forecast,
)
from .gait import ContactPlan, GaitSpec, plan_footholds, schedule_contacts, stand_gait, trot_gait
from .harness import MetricsRow, check_orderings, compute_mse, run_scenario_matrix
from .mpc import MpcWeights, QpProblem, QpSolution, ReferenceTrajectory, build_qp, mpc_step, solve_qp
from .reference import ProfileSegment, VelocityProfile, generate_reference, reference_state
from .sim import DisturbanceSpec, SimConfig, TrajectoryLog, run_episode, step_truth
from .config import ScenarioConfig, build_scenarios, default_scenarios, load_config

__version__ = "0.1.0"

__all__ = [
    "Disturbance",
    "DiscreteModel",
    "RobotParams",
    "State",
    "build_discrete_model",
    "euler_rate_transform",
    "predict_next_state",
    "rotation_world_body",
    "QuadmpcError",
    "DisturbancePolicy",
    "EstimatorConfig",
    "PeriodicModel",
    "ResidualHistory",
    "estimate_instant",
    "fit_periodic",
    "fit_static",
    "forecast",
    "ContactPlan",
    "GaitSpec",
    "plan_footholds",
    "schedule_contacts",
    "stand_gait",
    "trot_gait",
    "MetricsRow",
    "check_orderings",
    "compute_mse",
    "run_scenario_matrix",
    "MpcWeights",
    "QpProblem",
    "QpSolution",
    "ReferenceTrajectory",
    "build_qp",
    "mpc_step",
    "solve_qp",
    "ProfileSegment",
    "VelocityProfile",
    "generate_reference",
    "reference_state",
    "DisturbanceSpec",
    "SimConfig",
    "TrajectoryLog",
    "run_episode",
    "step_truth",
    "ScenarioConfig",
    "build_scenarios",
    "default_scenarios",
    "load_config",
    "__version__",
]
