"""Unified compliant controller for the two-level hierarchy.

The commanded torque is the sum of gravity compensation, a powerless
inertial coupling compensation between the two task levels, and one
impedance torque per level. Stiffness is not constant: it is rescheduled
every cycle from the interaction weighting factors, with damping kept
critical, so the robot fades between stiff tracking and full compliance
without switching controllers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .hierarchy import HierarchyDecomposition
from .model import JointState, Pose
from .rotations import rotation_between
from .weighting import Factors

LOG = logging.getLogger(__name__)

# Stiffness ceilings used when a scenario does not override them: the first
# three entries act on translation (N/m), the last three on the rotation
# vector error (N m/rad), and the scalar on the posture joint (N m/rad).
K1G_DEFAULT = np.array([500.0, 500.0, 500.0, 20.0, 20.0, 20.0])
K2G_DEFAULT = 10.0


@dataclass(frozen=True)
class ImpedanceParams:
    """Per-level stiffness and damping, damping always critical."""

    K1: np.ndarray   # (6, 6) diagonal
    D1: np.ndarray   # (6, 6) diagonal
    K2: float
    D2: float
    K1g: np.ndarray  # (6,) stiffness ceiling
    K2g: float

    def __post_init__(self):
        k1 = np.diag(self.K1)
        d1 = np.diag(self.D1)
        if np.any(k1 < 0.0) or self.K2 < 0.0:
            raise ValueError("stiffness must be non-negative")
        if np.max(np.abs(d1 * d1 - 4.0 * k1)) > 1e-12:
            raise ValueError("task-1 damping is not critical")
        if abs(self.D2 * self.D2 - 4.0 * self.K2) > 1e-12:
            raise ValueError("task-2 damping is not critical")


@dataclass(frozen=True)
class TaskTargets:
    """Desired motion for both levels during one cycle."""

    x_1d: Pose
    xd_1d: np.ndarray    # (6,) desired main-task velocity
    xdd_1d: np.ndarray   # (6,) desired main-task acceleration
    x_2d: float          # desired first-joint angle (rad)
    tracking: bool = False

    @staticmethod
    def hold(pose: Pose, x_2d: float) -> "TaskTargets":
        return TaskTargets(pose, np.zeros(6), np.zeros(6), float(x_2d))


@dataclass(frozen=True)
class ControlCommand:
    tau: np.ndarray
    tau_g: np.ndarray
    tau_d: np.ndarray
    tau_1: np.ndarray
    tau_2: np.ndarray
    compensate_external: bool


def make_impedance(k1_diag, k2: float, k1g=None, k2g: float | None = None) -> ImpedanceParams:
    """Build params from stiffness alone; damping follows critically."""
    k1_diag = np.asarray(k1_diag, dtype=float)
    k1g = k1_diag.copy() if k1g is None else np.asarray(k1g, dtype=float)
    return ImpedanceParams(
        K1=np.diag(k1_diag),
        D1=np.diag(2.0 * np.sqrt(k1_diag)),
        K2=float(k2),
        D2=2.0 * float(np.sqrt(k2)),
        K1g=k1g,
        K2g=float(k2 if k2g is None else k2g),
    )


def schedule_stiffness(factors: Factors, k1g=None, k2g: float | None = None) -> ImpedanceParams:
    """Reschedule both stiffness levels from the weighting factors.

    Hand proximity softens everything; contact force and patient proximity
    soften the main task so the probe cannot press hard near the neck; body
    proximity plays through the mode logic instead, and unexplained torque
    softens only the posture task. Factors outside [0, 1] are clamped with
    a warning rather than rejected, since the loop must keep running.
    """
    k1g = K1G_DEFAULT.copy() if k1g is None else np.asarray(k1g, dtype=float)
    k2g = K2G_DEFAULT if k2g is None else float(k2g)

    raw = factors.as_dict()
    clean = {}
    for name, value in raw.items():
        if value < 0.0 or value > 1.0:
            LOG.warning("factor %s = %g outside [0, 1]; clamped", name, value)
            value = min(1.0, max(0.0, value))
        clean[name] = value

    k1 = (1.0 - clean["a_h"]) * (1.0 - clean["a_f"]) * (1.0 - clean["a_p"]) * k1g
    k2 = (1.0 - clean["a_h"]) * (1.0 - clean["a_n"]) * k2g
    return make_impedance(k1, k2, k1g=k1g, k2g=k2g)


def task_error(pose: Pose, target: Pose) -> np.ndarray:
    """Six-vector pose error: translation, then the rotation vector taking
    the desired orientation into the current one."""
    err = np.empty(6)
    err[:3] = pose.position - target.position
    err[3:] = rotation_between(pose.quat, target.quat)
    return err


def compensation_torque(decomp: HierarchyDecomposition) -> np.ndarray:
    """Inertial coupling compensation between the levels.

    Built from the opposed off-diagonal Coriolis blocks, so the injected
    mechanical power is exactly zero for every joint velocity.
    """
    return decomp.jbar1.T @ (decomp.mu12 @ decomp.v2) + decomp.jbar2.T @ (decomp.mu21 @ decomp.v1)


def task_torques(
    decomp: HierarchyDecomposition,
    targets: TaskTargets,
    params: ImpedanceParams,
    state: JointState,
    pose: Pose,
    err1: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Impedance torque per level.

    Level 1 runs a regulation form by default and a feedforward tracking
    form when the targets carry one (recovery motions). Level 2 acts on the
    first joint angle through the null space of level 1, so it can never
    accelerate the main task. ``err1`` may carry a precomputed
    ``task_error(pose, targets.x_1d)``.
    """
    if err1 is None:
        err1 = task_error(pose, targets.x_1d)
    if targets.tracking:
        f1 = targets.xdd_1d - params.K1 @ err1 - params.D1 @ (decomp.v1 - targets.xd_1d)
    else:
        f1 = -params.K1 @ err1 - params.D1 @ decomp.v1
    tau_1 = decomp.jbar1.T @ f1

    x2 = (decomp.j2 @ state.q).item()
    xd2 = (decomp.j2 @ state.qd).item()
    f2 = -params.K2 * (x2 - targets.x_2d) - params.D2 * xd2
    gain = (decomp.z2 @ decomp.j2.T).item()
    tau_2 = decomp.jbar2.T @ np.atleast_1d(gain * f2)
    return tau_1, tau_2


def total_control(
    decomp: HierarchyDecomposition,
    targets: TaskTargets,
    params: ImpedanceParams,
    state: JointState,
    pose: Pose,
    gravity: np.ndarray,
    tau_e: np.ndarray,
    compensate_external: bool = False,
    err1: np.ndarray | None = None,
) -> ControlCommand:
    """Assemble the full commanded torque for one cycle.

    The sum order is fixed so logs can reproduce the command bit-exactly.
    External-torque cancellation is available but off by default: cancelling
    what a person applies would fight the compliance the factors create.
    """
    tau_g = np.asarray(gravity, dtype=float)
    tau_d = compensation_torque(decomp)
    tau_1, tau_2 = task_torques(decomp, targets, params, state, pose, err1)

    for name, part in (("tau_g", tau_g), ("tau_d", tau_d),
                       ("tau_1", tau_1), ("tau_2", tau_2)):
        if not np.isfinite(part).all():
            raise ValueError(f"non-finite control component {name}")

    tau = ((tau_g + tau_d) + tau_1) + tau_2
    if compensate_external:
        tau = tau - np.asarray(tau_e, dtype=float)
    return ControlCommand(tau=tau, tau_g=tau_g, tau_d=tau_d, tau_1=tau_1,
                          tau_2=tau_2, compensate_external=compensate_external)
