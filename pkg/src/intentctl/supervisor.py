"""Mode supervision: one interaction mode active per control cycle.

The supervisor turns the weighting factors plus task progress into a mode
decision, then produces the desired targets that mode implies. Decisions
are a pure priority cascade; all memory (progress time, frozen poses, the
body-avoid offset, the active recovery segment) lives in an explicit
state object owned by the stepping loop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .controller import TaskTargets
from .model import Pose
from .rotations import quat_multiply, quat_rotate, quat_slerp, rotation_between
from .weighting import Factors


class Mode(enum.Enum):
    WAITING = "Waiting"
    RECOVERY = "Recovery"
    SCANNING = "Scanning"
    HUMAN_GUIDING = "HumanGuiding"
    AVOIDING = "Avoiding"
    CONTACTING = "Contacting"


@dataclass(frozen=True)
class Thresholds:
    """Activation levels for the mode cascade.

    eps bounds the translational task error only; mixing meters with
    radians in one norm would make the threshold unit-dependent.
    """

    a_ht: float = 0.5
    a_pt: float = 0.5
    a_ft: float = 0.05
    a_bt: float = 0.5
    a_nt: float = 0.5
    eps: float = 0.03

    def __post_init__(self):
        for name in ("a_ht", "a_pt", "a_ft", "a_bt", "a_nt"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"threshold {name} must lie in (0, 1)")
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")


def trajectory_index(t_p: float, n: int, total_time: float) -> int:
    """Map progress time onto a 1-based trajectory point index."""
    if total_time <= 0.0:
        raise ValueError("total task time must be positive")
    i = int(math.floor(t_p * n / total_time + 0.5))
    return min(max(i, 1), n)


def decide_mode(factors: Factors, thresholds: Thresholds,
                task_error_norm: float, trajectory_present: bool) -> Mode:
    """Priority cascade choosing the active mode.

    A guiding hand overrides everything; without a trajectory the robot
    waits; near the patient or in contact it scans, splitting into the
    body-interaction modes when the doctor's body is close; otherwise it
    recovers toward the trajectory. Ties on a_n go to Avoiding.
    """
    if factors.a_h >= thresholds.a_ht:
        return Mode.HUMAN_GUIDING
    if not trajectory_present:
        return Mode.WAITING
    engaged = (task_error_norm < thresholds.eps and factors.a_p > thresholds.a_pt) \
        or factors.a_f > thresholds.a_ft
    if engaged:
        if factors.a_b > thresholds.a_bt:
            if factors.a_n > thresholds.a_nt:
                return Mode.CONTACTING
            return Mode.AVOIDING
        return Mode.SCANNING
    return Mode.RECOVERY


class TrajectoryBuffer:
    """Desired scan poses stored in the neck frame.

    Keeping the buffer in the patient's frame means a patient motion moves
    every desired pose with it; the world-frame target is composed against
    the current neck pose each cycle. Each point also carries a secondary
    (first joint) target.
    """

    def __init__(self, positions, quats, x2d, total_time: float):
        self.positions = np.asarray(positions, dtype=float)
        self.quats = np.asarray(quats, dtype=float)
        self.x2d = np.asarray(x2d, dtype=float)
        self.total_time = float(total_time)
        n = self.positions.shape[0]
        if n < 2:
            raise ValueError("trajectory needs at least two points")
        if self.quats.shape != (n, 4) or self.x2d.shape != (n,):
            raise ValueError("trajectory field lengths disagree")
        if self.total_time <= 0.0:
            raise ValueError("total task time must be positive")
        steps = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        if np.any(steps > 0.005 + 1e-12):
            raise ValueError("trajectory positions jump more than 5 mm")
        for a, b in zip(self.quats[:-1], self.quats[1:]):
            if np.linalg.norm(rotation_between(a, b)) > 0.05:
                raise ValueError("trajectory orientations jump more than 0.05 rad")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def index(self, t_p: float) -> int:
        return trajectory_index(t_p, self.n, self.total_time)

    def world_pose(self, i: int, neck: Pose) -> Pose:
        """Compose point ``i`` (1-based) with the current neck pose."""
        p = self.positions[i - 1]
        q = self.quats[i - 1]
        return Pose(neck.position + quat_rotate(neck.quat, p),
                    quat_multiply(neck.quat, q))

    def secondary(self, i: int) -> float:
        return float(self.x2d[i - 1])


def _minjerk_s(tau: float) -> tuple[float, float, float]:
    # quintic time scaling with zero boundary velocity and acceleration
    s = ((6.0 * tau - 15.0) * tau + 10.0) * tau**3
    sd = ((30.0 * tau - 60.0) * tau + 30.0) * tau**2
    sdd = ((120.0 * tau - 180.0) * tau + 60.0) * tau
    return s, sd, sdd


class MinJerkSegment:
    """Smooth point-to-point reference between two poses."""

    def __init__(self, start: Pose, goal: Pose, t0: float, duration: float):
        if duration <= 0.0:
            raise ValueError("segment duration must be positive")
        self.start = start
        self.goal = goal
        self.t0 = float(t0)
        self.duration = float(duration)
        self._dp = goal.position - start.position
        # world-frame rotation carrying the start orientation to the goal
        self._rot = rotation_between(goal.quat, start.quat)

    def _tau(self, t: float) -> float:
        return min(max((t - self.t0) / self.duration, 0.0), 1.0)

    def done(self, t: float) -> bool:
        return t >= self.t0 + self.duration

    def sample(self, t: float) -> tuple[Pose, np.ndarray, np.ndarray]:
        """Pose, 6-velocity, and 6-acceleration of the reference at ``t``."""
        tau = self._tau(t)
        s, sd, sdd = _minjerk_s(tau)
        sd /= self.duration
        sdd /= self.duration**2
        pose = Pose(self.start.position + s * self._dp,
                    quat_slerp(self.start.quat, self.goal.quat, s))
        vel = np.concatenate([sd * self._dp, sd * self._rot])
        acc = np.concatenate([sdd * self._dp, sdd * self._rot])
        return pose, vel, acc


RECOVERY_SPEED = 0.1          # m/s used to size recovery durations
RECOVERY_MIN_DURATION = 1.0   # s
RECOVERY_REGEN_DIST = 0.02    # m of goal drift that forces a new segment
RECOVERY_X2D_PERIOD = 100     # cycles between secondary-target refreshes
AVOID_RETURN_BELOW = 0.01     # a_b level under which the offset returns


@dataclass
class SupervisorState:
    """Everything the supervisor remembers between cycles."""

    mode: Mode = Mode.WAITING
    t_p: float = 0.0
    waiting_pose: Pose | None = None
    waiting_x2d: float = 0.0
    avoid_offset: float = 0.0
    x_2d_origin: float = 0.0
    recovery_x2d: float = 0.0
    recovery_cycles: int = 0
    segment: MinJerkSegment | None = None


class ModeSupervisor:
    """Advances the mode state machine once per control cycle."""

    def __init__(self, thresholds: Thresholds | None = None, dt: float = 1e-3,
                 delta: float = 0.002, delta_ret: float = 0.001):
        if dt <= 0.0:
            raise ValueError("control period must be positive")
        if delta <= 0.0 or delta_ret <= 0.0:
            raise ValueError("avoid rates must be positive")
        self.thresholds = thresholds or Thresholds()
        self.dt = float(dt)
        self.delta = float(delta)
        self.delta_ret = float(delta_ret)
        self.trajectory: TrajectoryBuffer | None = None
        self.state = SupervisorState()

    def set_trajectory(self, traj: TrajectoryBuffer | None) -> None:
        self.trajectory = traj

    def scan_target(self, neck: Pose) -> tuple[Pose, float]:
        """World-frame trajectory target at the current progress time."""
        if self.trajectory is None:
            raise RuntimeError("no trajectory available")
        i = self.trajectory.index(self.state.t_p)
        return (self.trajectory.world_pose(i, neck),
                self.trajectory.secondary(i))

    def update(self, factors: Factors, pose: Pose, q1: float, neck: Pose,
               t: float, side: float = 1.0) -> tuple[Mode, TaskTargets]:
        """Decide the mode for this cycle and produce its targets.

        ``side`` carries the doctor's side of the robot (+1/-1) so the
        avoid deviation moves the elbow away from, not into, the person.
        """
        st = self.state
        present = self.trajectory is not None
        if present:
            target_pose, target_x2d = self.scan_target(neck)
            err_norm = float(np.linalg.norm(pose.position - target_pose.position))
        else:
            target_pose, target_x2d = None, 0.0
            err_norm = math.inf

        mode = decide_mode(factors, self.thresholds, err_norm, present)
        if mode is not st.mode:
            self._enter(mode, pose, q1, target_x2d, t)
        st.mode = mode

        # the avoid offset returns only once the body has clearly left
        if mode is not Mode.AVOIDING and st.avoid_offset != 0.0 \
                and factors.a_b < AVOID_RETURN_BELOW:
            step = min(self.delta_ret, abs(st.avoid_offset))
            st.avoid_offset -= math.copysign(step, st.avoid_offset)

        if mode is Mode.WAITING:
            if st.waiting_pose is None:  # supervisor starts out waiting
                st.waiting_pose = pose
                st.waiting_x2d = q1
            return mode, TaskTargets.hold(st.waiting_pose, st.waiting_x2d)

        if mode is Mode.HUMAN_GUIDING:
            # the measured pose itself: the reference must match the plant
            # bit for bit so the guiding stiffness sees zero error
            return mode, TaskTargets.hold(pose, q1)

        if mode is Mode.RECOVERY:
            return mode, self._recovery_targets(pose, q1, neck, t)

        if mode is Mode.SCANNING:
            targets = TaskTargets.hold(target_pose, target_x2d + st.avoid_offset)
            st.t_p = min(st.t_p + self.dt, self.trajectory.total_time)
            return mode, targets

        if mode is Mode.AVOIDING:
            st.avoid_offset += side * factors.a_b * self.delta
            return mode, TaskTargets.hold(target_pose,
                                          st.x_2d_origin + st.avoid_offset)

        # Contacting: hold the trajectory point, progress frozen
        return mode, TaskTargets.hold(target_pose, target_x2d + st.avoid_offset)

    def _enter(self, mode: Mode, pose: Pose, q1: float, target_x2d: float,
               t: float) -> None:
        st = self.state
        if mode is Mode.WAITING:
            # poses are never mutated after construction, so holding the
            # reference keeps the frozen target bit-exact
            st.waiting_pose = pose
            st.waiting_x2d = q1
        elif mode is Mode.RECOVERY:
            st.segment = None
            st.recovery_x2d = q1
            st.recovery_cycles = 0
        elif mode is Mode.AVOIDING:
            st.x_2d_origin = target_x2d

    def _recovery_targets(self, pose: Pose, q1: float, neck: Pose,
                          t: float) -> TaskTargets:
        st = self.state
        goal_pose, _ = self.scan_target(neck)
        if st.segment is None or \
                np.linalg.norm(goal_pose.position - st.segment.goal.position) \
                > RECOVERY_REGEN_DIST:
            dist = float(np.linalg.norm(goal_pose.position - pose.position))
            duration = max(RECOVERY_MIN_DURATION, dist / RECOVERY_SPEED)
            st.segment = MinJerkSegment(pose, goal_pose, t, duration)

        st.recovery_cycles += 1
        if st.recovery_cycles % RECOVERY_X2D_PERIOD == 0:
            st.recovery_x2d = q1

        ref_pose, vel, acc = st.segment.sample(t)
        return TaskTargets(x_1d=ref_pose, xd_1d=vel, xdd_1d=acc,
                           x_2d=st.recovery_x2d, tracking=True)
