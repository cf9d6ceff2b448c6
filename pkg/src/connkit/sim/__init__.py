from .world import (
    Command,
    ContactReading,
    HoleSpec,
    JointState,
    Phase,
    SimParams,
    World,
    step_sim,
)
from .trial import check_success, default_hole, init_trial

__all__ = [
    "Command",
    "ContactReading",
    "HoleSpec",
    "JointState",
    "Phase",
    "SimParams",
    "World",
    "step_sim",
    "check_success",
    "default_hole",
    "init_trial",
]
