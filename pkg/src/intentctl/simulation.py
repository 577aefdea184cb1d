"""The closed-loop world: robot, controller, contact, events, telemetry.

One ``step`` call advances a single control cycle in a fixed order: event
signals, perception snapshot, weighting factors, mode decision, targets,
stiffness schedule, task hierarchy, torque synthesis, dynamics integration,
telemetry. The stepping loop is the only writer of simulation state;
telemetry and diagnostics are append-only lists that a concurrent reader
may consume up to the last completed index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .contact import NeckModel, external_torque, probe_contact_wrench
from .controller import schedule_stiffness, task_error, total_control
from .dynamics import evaluate_dynamics, forward_dynamics_step, jacobian_secondary
from .events import EventTimeline
from .hierarchy import HierarchyContext, SingularityError, decouple
from .model import JointState, Pose, RobotModel
from .supervisor import ModeSupervisor, TrajectoryBuffer
from .weighting import FactorParams, PerceptionSnapshot, compute_factors, null_space_torque
from .rotations import quat_conjugate, quat_rotate

LOG = logging.getLogger(__name__)

SINGULAR_RATIO_WARN = 1e-6

TELEMETRY_COLUMNS = (
    "time_s", "mode", "a_h", "a_p", "a_f", "a_n", "a_b", "k_d1", "k_d2",
    "err_x", "err_y", "err_z", "err_rx", "err_ry", "err_rz",
    "x1d_x", "x1d_y", "x1d_z", "f_z_E", "tau_n_norm", "energy_residual",
)


@dataclass(frozen=True)
class TelemetryRecord:
    """One control cycle as logged; matches the CSV columns exactly."""

    time_s: float
    mode: str
    a_h: float
    a_p: float
    a_f: float
    a_n: float
    a_b: float
    k_d1: float
    k_d2: float
    err: np.ndarray       # (6,) main-task error, translation then rotation
    x1d: np.ndarray       # (3,) desired position
    f_z_E: float
    tau_n_norm: float
    energy_residual: float

    def row(self) -> list[str]:
        values = [self.time_s, self.mode, self.a_h, self.a_p, self.a_f,
                  self.a_n, self.a_b, self.k_d1, self.k_d2, *self.err,
                  *self.x1d, self.f_z_E, self.tau_n_norm,
                  self.energy_residual]
        return [v if isinstance(v, str) else f"{v:.9g}" for v in values]


@dataclass(frozen=True)
class StepDiagnostics:
    """Full-precision extras kept in memory only, for analysis and checks."""

    time_s: float
    mode: str
    x_2d: float
    x2: float
    k1_diag: np.ndarray
    k_d2: float
    factors_vec: np.ndarray       # a_h, a_p, a_f, a_n, a_b
    zero_power_ratio: float
    transparency_ratio: float
    singular_ratio: float
    storage: float
    tracking: bool
    q: np.ndarray
    qd: np.ndarray
    tau: np.ndarray
    tau_e: np.ndarray
    x1d_pos: np.ndarray
    neck_position: np.ndarray
    singular: bool


def write_telemetry_csv(records, stream) -> None:
    stream.write(",".join(TELEMETRY_COLUMNS) + "\n")
    for record in records:
        stream.write(",".join(record.row()) + "\n")


class SimWorld:
    """Owns everything that changes while the scenario runs."""

    def __init__(
        self,
        model: RobotModel,
        initial_state: JointState,
        neck: NeckModel,
        timeline: EventTimeline,
        supervisor: ModeSupervisor,
        factor_params: FactorParams,
        k1g: np.ndarray,
        k2g: float,
        trajectory: TrajectoryBuffer | None = None,
        trajectory_available_at: float = 0.0,
        compensate_external: bool = False,
        dt: float = 1e-3,
    ):
        self.model = model
        self._q0 = np.array(initial_state.q, dtype=float)
        self._qd0 = np.array(initial_state.qd, dtype=float)
        self.state = JointState(self._q0.copy(), self._qd0.copy())
        self.neck = neck
        self._neck_base = neck.pose
        self.timeline = timeline
        self._events0 = list(timeline.events)
        self.supervisor = supervisor
        self.factor_params = factor_params
        self.k1g = np.asarray(k1g, dtype=float).reshape(6)
        self.k2g = float(k2g)
        self.trajectory = trajectory
        self.trajectory_available_at = float(trajectory_available_at)
        self.compensate_external = bool(compensate_external)
        self.dt = float(dt)
        self.j2 = jacobian_secondary(model)
        self.telemetry: list[TelemetryRecord] = []
        self.diagnostics: list[StepDiagnostics] = []
        self._reset_runtime()

    def _reset_runtime(self) -> None:
        self.t = 0.0
        self.cycle = 0
        self.context = HierarchyContext(self.dt)
        self._prev_storage: float | None = None
        self._prev_k1: np.ndarray | None = None
        self._prev_k2: float | None = None
        self._prev_ext_power = 0.0
        self.energy_ledger = 0.0

    def reset(self) -> None:
        """Back to the initial state; telemetry restarts at time zero."""
        self.state = JointState(self._q0.copy(), self._qd0.copy())
        self.neck.pose = self._neck_base
        self.timeline.events[:] = self._events0   # drop injected events
        self.timeline.reset()
        sup = self.supervisor
        self.supervisor = ModeSupervisor(sup.thresholds, sup.dt, sup.delta,
                                         sup.delta_ret)
        self.telemetry = []
        self.diagnostics = []
        self._reset_runtime()

    def inject_event(self, event) -> None:
        """Append a new scripted event; takes effect from the next step."""
        self.timeline.add(event)

    def step(self) -> None:
        t = self.t
        state = self.state

        # scripted world signals for this instant
        self.neck.pose = Pose(
            self._neck_base.position
            + self.timeline.neck_displacement(t, self._neck_base),
            self._neck_base.quat)
        d_h = self.timeline.hand_distance(t)
        d_b, side, body_torque = self.timeline.body_state(t)

        if self.trajectory is not None and self.supervisor.trajectory is None \
                and t >= self.trajectory_available_at:
            self.supervisor.set_trajectory(self.trajectory)

        ev = evaluate_dynamics(self.model, state)
        pose = ev.pose
        probe_vel = ev.j1 @ state.qd

        contact_wrench, f_z = probe_contact_wrench(pose, probe_vel, self.neck)
        ee_wrench = contact_wrench \
            + self.timeline.grasp_wrench(t, pose, probe_vel, self.neck.pose) \
            + self.timeline.push_wrench(t, pose, self.neck.pose)
        tau_e, f_1e = external_torque(ev.j1, ee_wrench, body_torque)

        d_p = quat_rotate(quat_conjugate(self.neck.pose.quat),
                          pose.position - self.neck.pose.position)
        snapshot = PerceptionSnapshot(d_h=d_h, d_b=d_b, d_p=d_p, f_z_E=f_z,
                                      tau_e=tau_e, F_1e=f_1e)
        factors = compute_factors(snapshot, self.factor_params, ev.j1)

        mode, targets = self.supervisor.update(
            factors, pose, float(state.q[0]), self.neck.pose, t, side)
        params = schedule_stiffness(factors, k1g=self.k1g, k2g=self.k2g)

        sigma, vt = np.linalg.svd(ev.j1)[1:]
        singular_ratio = float(sigma[-1] / sigma[0]) if sigma[0] > 0.0 else 0.0
        singular = singular_ratio < SINGULAR_RATIO_WARN
        err = task_error(pose, targets.x_1d)
        try:
            decomp = decouple(self.model, state, context=self.context,
                              eval_=ev, svd=(sigma, vt))
            command = total_control(decomp, targets, params, state, pose,
                                    ev.gravity, tau_e,
                                    self.compensate_external, err1=err)
        except SingularityError:
            # hold against gravity through the singular patch; flag it
            LOG.warning("singular configuration at t=%.3f; gravity hold", t)
            singular = True
            decomp = None
            command = None
        x2 = float(state.q[0])
        x2_err = x2 - targets.x_2d
        tau_n = null_space_torque(tau_e, ev.j1, f_1e)

        k1_diag = np.diag(params.K1).copy()
        storage = 0.5 * float(state.qd @ ev.mass @ state.qd) \
            + 0.5 * float(err @ (k1_diag * err)) \
            + 0.5 * params.K2 * x2_err * x2_err
        if self._prev_storage is None:
            residual = 0.0
        else:
            stiffness_power = 0.5 * float(
                err @ ((k1_diag - self._prev_k1) * err)) \
                + 0.5 * (params.K2 - self._prev_k2) * x2_err * x2_err
            residual = (storage - self._prev_storage) \
                - self._prev_ext_power * self.dt - stiffness_power
        self._prev_storage = storage
        self._prev_k1 = k1_diag
        self._prev_k2 = params.K2
        self._prev_ext_power = float(state.qd @ tau_e)
        self.energy_ledger += residual

        if command is not None:
            tau = command.tau
            qd = state.qd
            denom = float(np.linalg.norm(command.tau_d) * np.linalg.norm(qd))
            zero_power = abs(float(command.tau_d @ qd)) / denom \
                if denom > 1e-12 else 0.0
            t2n = float(np.linalg.norm(command.tau_2))
            transparency = float(np.linalg.norm(
                ev.j1 @ np.linalg.solve(ev.mass, command.tau_2))) / t2n \
                if t2n > 1e-15 else 0.0
        else:
            tau = ev.gravity.copy()
            zero_power = 0.0
            transparency = 0.0

        self.telemetry.append(TelemetryRecord(
            time_s=t, mode=mode.value, a_h=factors.a_h, a_p=factors.a_p,
            a_f=factors.a_f, a_n=factors.a_n, a_b=factors.a_b,
            k_d1=float(k1_diag[0]), k_d2=float(params.K2), err=err,
            x1d=targets.x_1d.position.copy(), f_z_E=f_z,
            tau_n_norm=float(np.linalg.norm(tau_n)),
            energy_residual=residual))
        self.diagnostics.append(StepDiagnostics(
            time_s=t, mode=mode.value, x_2d=targets.x_2d, x2=x2,
            k1_diag=k1_diag, k_d2=float(params.K2),
            factors_vec=np.array([factors.a_h, factors.a_p, factors.a_f,
                                  factors.a_n, factors.a_b]),
            zero_power_ratio=zero_power, transparency_ratio=transparency,
            singular_ratio=singular_ratio, storage=storage,
            tracking=targets.tracking, q=state.q.copy(), qd=state.qd.copy(),
            tau=tau.copy(), tau_e=tau_e.copy(),
            x1d_pos=targets.x_1d.position.copy(),
            neck_position=self.neck.pose.position.copy(), singular=singular))

        self.state = forward_dynamics_step(self.model, state, tau, tau_e,
                                           self.dt, eval_=ev)
        if not (np.all(np.isfinite(self.state.q))
                and np.all(np.isfinite(self.state.qd))):
            raise RuntimeError(f"simulation state non-finite at t={t:.3f}")
        self.cycle += 1
        self.t = self.cycle * self.dt

    def run(self, duration: float) -> None:
        steps = int(round(duration / self.dt))
        for _ in range(steps):
            self.step()
