import numpy as np
import pytest

from quadmpc.dynamics import RobotParams, State
from quadmpc.gait import ContactPlan
from quadmpc.mpc import ReferenceTrajectory


@pytest.fixture
def params():
    return RobotParams()


def standing_state(params: RobotParams) -> State:
    return State(
        theta=np.zeros(3),
        p=np.array([0.0, 0.0, params.com_height]),
        omega=np.zeros(3),
        v=np.zeros(3),
    )


def standing_plan(params: RobotParams, k: int) -> ContactPlan:
    """All four feet in stance at their nominal hip projections."""
    stance = np.ones((k, 4), dtype=bool)
    foot_r = np.tile(np.asarray(params.hip_offsets), (k, 1, 1))
    return ContactPlan(stance=stance, foot_r=foot_r)


def hold_reference(x: State, k: int) -> ReferenceTrajectory:
    return ReferenceTrajectory(states=np.tile(x.to_vector(), (k, 1)))
