"""Intention-aware interaction control for a redundant scanning arm.

Library layout:

- ``model`` / ``dynamics``: robot description, kinematics, rigid-body dynamics
- ``hierarchy``: two-level null-space decoupling of the task hierarchy
- ``weighting``: smooth human-intention weighting factors
- ``controller``: unified compliance controller and stiffness scheduling
- ``supervisor``: interaction mode state machine and trajectory targets
- ``simulation``: closed-loop world stepping, contact, events, telemetry
- ``scenario`` / ``runner`` / ``server`` / ``cli``: file formats and harness
"""

from .model import JointState, Pose, RobotModel, builtin_robot_path, load_robot
from .dynamics import (
    coriolis_matrix,
    forward_dynamics_step,
    forward_kinematics,
    gravity_vector,
    jacobian_main,
    jacobian_secondary,
    mass_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "JointState",
    "Pose",
    "RobotModel",
    "builtin_robot_path",
    "load_robot",
    "coriolis_matrix",
    "forward_dynamics_step",
    "forward_kinematics",
    "gravity_vector",
    "jacobian_main",
    "jacobian_secondary",
    "mass_matrix",
    "__version__",
]
