"""Rigid-body kinematics and dynamics for the serial chain.

The manipulator equation used throughout is

    M(q) qdd + C(q, qd) qd + g(q) = tau + tau_ext

with M from the per-link Jacobian composition, C built from Christoffel
symbols of the first kind (so that dM/dt - 2C stays skew-symmetric), and g as
the gradient of gravitational potential energy. Integration is semi-implicit
Euler: velocity first, then position with the new velocity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import JointState, Pose, RobotModel
from .rotations import matrix_to_quat

MAX_TIMESTEP = 0.005


@lru_cache(maxsize=8)
@lru_cache(maxsize=8)
def _masks(n: int):
    # cached and shared; treat the returned arrays as read-only
    lower = np.tril(np.ones((n, n)))        # [l, k]: k <= l
    strict = np.triu(np.ones((n, n)), 1)    # [m, k]: m < k
    return lower, lower.T.copy(), strict    # second entry: [m, l]: m <= l


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product over the last axis, broadcasting like np.cross but leaner."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    out[..., 0] = a1 * b2 - a2 * b1
    out[..., 1] = a2 * b0 - a0 * b2
    out[..., 2] = a0 * b1 - a1 * b0
    return out


def _skew_stack(v: np.ndarray) -> np.ndarray:
    n = v.shape[0]
    s = np.zeros((n, 3, 3))
    s[:, 0, 1] = -v[:, 2]
    s[:, 0, 2] = v[:, 1]
    s[:, 1, 0] = v[:, 2]
    s[:, 1, 2] = -v[:, 0]
    s[:, 2, 0] = -v[:, 1]
    s[:, 2, 1] = v[:, 0]
    return s


@dataclass
class ChainData:
    """World-frame quantities of every joint/link at a configuration."""

    rots: np.ndarray      # (n, 3, 3) link orientations
    axes_w: np.ndarray    # (n, 3) joint axes
    origins: np.ndarray   # (n, 3) joint origins
    coms_w: np.ndarray    # (n, 3) link centers of mass
    ee_pos: np.ndarray    # (3,)
    ee_rot: np.ndarray    # (3, 3)


def chain_data(model: RobotModel, q: np.ndarray) -> ChainData:
    q = np.asarray(q, dtype=float)
    n = model.n
    rots = np.empty((n, 3, 3))
    axes_w = np.empty((n, 3))
    origins = np.empty((n, 3))
    # Rodrigues for all joints at once: R = I + sin(q) S + (1 - cos(q)) S^2
    local = (
        np.eye(3)[None, :, :]
        + np.sin(q)[:, None, None] * model._ax_skew
        + (1.0 - np.cos(q))[:, None, None] * model._ax_skew2
    )
    r = np.eye(3)
    p = np.zeros(3)
    for i in range(n):
        p = p + r @ model.offsets[i]
        axes_w[i] = r @ model.axes[i]
        r = r @ local[i]
        rots[i] = r
        origins[i] = p
    coms_w = origins + np.matmul(rots, model.coms[:, :, None])[:, :, 0]
    ee_pos = origins[-1] + rots[-1] @ model.ee_offset
    return ChainData(rots, axes_w, origins, coms_w, ee_pos, rots[-1])


def _link_jacobians(model: RobotModel, cd: ChainData):
    """Linear com Jacobians JV (n,3,n) and angular Jacobians JW (n,3,n)."""
    n = model.n
    lower = _masks(n)[0]
    diff = cd.coms_w[:, None, :] - cd.origins[None, :, :]  # (l, k, 3)
    jv = _cross(cd.axes_w[None, :, :], diff) * lower[:, :, None]
    jw = cd.axes_w[None, :, :] * lower[:, :, None]
    return jv.transpose(0, 2, 1), jw.transpose(0, 2, 1)


def forward_kinematics(model: RobotModel, q: np.ndarray) -> Pose:
    cd = chain_data(model, q)
    return Pose(cd.ee_pos, matrix_to_quat(cd.ee_rot))


def jacobian_main(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian of the flange pose, rows [linear; angular], 6 x n."""
    cd = chain_data(model, q)
    j = np.zeros((6, model.n))
    j[0:3] = _cross(cd.axes_w, cd.ee_pos[None, :] - cd.origins).T
    j[3:6] = cd.axes_w.T
    return j


def jacobian_secondary(model: RobotModel) -> np.ndarray:
    """Selector for the posture coordinate: the first joint angle, 1 x n."""
    j = np.zeros((1, model.n))
    j[0, 0] = 1.0
    return j


def _mass_from_parts(model, jv, jw, iw) -> np.ndarray:
    jv_w = model.masses[:, None, None] * jv
    m = np.matmul(jv.transpose(0, 2, 1), jv_w).sum(axis=0)
    m += np.matmul(jw.transpose(0, 2, 1), np.matmul(iw, jw)).sum(axis=0)
    # reflected drive inertia is configuration independent, so it never
    # contributes to dM/dq or the Coriolis matrix
    m[np.diag_indices_from(m)] += model.rotor_inertia
    return m


def mass_matrix(model: RobotModel, q: np.ndarray) -> np.ndarray:
    cd = chain_data(model, q)
    jv, jw = _link_jacobians(model, cd)
    return _mass_from_parts(model, jv, jw, _world_inertias(model, cd))


def mass_matrix_derivatives(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Configuration gradient of the mass matrix: dm[k] = dM/dq_k, (n,n,n)."""
    cd = chain_data(model, q)
    return _mass_derivatives(model, cd)


def _world_inertias(model: RobotModel, cd: ChainData) -> np.ndarray:
    return np.matmul(np.matmul(cd.rots, model.inertias), cd.rots.transpose(0, 2, 1))


def _mass_derivatives(model: RobotModel, cd: ChainData, parts=None) -> np.ndarray:
    n = model.n
    z, o, c = cd.axes_w, cd.origins, cd.coms_w
    lower, le, strict = _masks(n)

    if parts is None:
        jv, jw = _link_jacobians(model, cd)
        iw = _world_inertias(model, cd)
    else:
        jv, jw, iw = parts

    # geometric derivatives of axes, joint origins, and coms
    zm = z[:, None, :]
    dz = _cross(zm, z[None, :, :]) * strict[:, :, None]                    # (m,k,3)
    do = _cross(zm, o[None, :, :] - o[:, None, :]) * strict[:, :, None]
    dc = _cross(zm, c[None, :, :] - o[:, None, :]) * le[:, :, None]

    diff = c[:, None, :] - o[None, :, :]                                   # (l,k,3)
    t1 = _cross(dz[:, None, :, :], diff[None, :, :, :])                    # (m,l,k,3)
    t2 = _cross(z[None, None, :, :], dc[:, :, None, :] - do[:, None, :, :])
    djv = (t1 + t2) * lower[None, :, :, None]                              # k <= l
    djw = dz[:, None, :, :] * lower[None, :, :, None]                      # (m,l,k,3)

    sz = _skew_stack(z)
    diw = np.matmul(sz[:, None], iw[None, :])
    diw = diw + diw.transpose(0, 1, 3, 2)
    diw *= le[:, :, None, None]

    # dM[m] = sum_l m_l (dJv' Jv + Jv' dJv) + dJw' Iw Jw + Jw' dIw Jw + Jw' Iw dJw
    jv_w = model.masses[:, None, None] * jv                                # (l,3,k)
    p = np.matmul(iw, jw)                                                  # (l,3,k)
    a1 = np.matmul(djv, jv_w[None]).sum(axis=1)                            # (m,k,k)
    a2 = np.matmul(djw, p[None]).sum(axis=1)
    a3 = np.matmul(jw.transpose(0, 2, 1)[None], np.matmul(diw, jw[None])).sum(axis=1)
    dm = a1 + a2
    dm += dm.transpose(0, 2, 1)
    dm += a3
    return dm


def coriolis_matrix(model: RobotModel, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """Coriolis/centrifugal matrix from Christoffel symbols of the first kind."""
    dm = mass_matrix_derivatives(model, q)
    return _christoffel(dm, np.asarray(qd, dtype=float))


def _christoffel(dm: np.ndarray, qd: np.ndarray) -> np.ndarray:
    return 0.5 * (
        np.einsum("kij,k->ij", dm, qd)
        + np.einsum("jik,k->ij", dm, qd)
        - np.einsum("ijk,k->ij", dm, qd)
    )


def gravity_vector(model: RobotModel, q: np.ndarray) -> np.ndarray:
    cd = chain_data(model, q)
    jv, _ = _link_jacobians(model, cd)
    return -(model.masses[:, None] * (jv.transpose(0, 2, 1) @ model.gravity)).sum(axis=0)


def potential_energy(model: RobotModel, q: np.ndarray) -> float:
    cd = chain_data(model, q)
    return -float(np.einsum("l,la,a->", model.masses, cd.coms_w, model.gravity))


def kinetic_energy(model: RobotModel, state: JointState) -> float:
    m = mass_matrix(model, state.q)
    return 0.5 * float(state.qd @ m @ state.qd)


@dataclass
class DynamicsEval:
    """Everything the control loop needs at one configuration."""

    pose: Pose
    ee_rot: np.ndarray
    j1: np.ndarray              # (6, n) flange Jacobian
    mass: np.ndarray            # (n, n)
    coriolis: np.ndarray        # (n, n)
    gravity: np.ndarray         # (n,)
    mass_grad: np.ndarray       # (n, n, n)


def evaluate_dynamics(model: RobotModel, state: JointState) -> DynamicsEval:
    """One-pass evaluation shared by the per-cycle controller pipeline."""
    cd = chain_data(model, state.q)
    j1 = np.zeros((6, model.n))
    j1[0:3] = _cross(cd.axes_w, cd.ee_pos[None, :] - cd.origins).T
    j1[3:6] = cd.axes_w.T
    jv, jw = _link_jacobians(model, cd)
    iw = _world_inertias(model, cd)
    mass = _mass_from_parts(model, jv, jw, iw)
    dm = _mass_derivatives(model, cd, parts=(jv, jw, iw))
    cor = _christoffel(dm, state.qd)
    grav = -(model.masses[:, None] * (jv.transpose(0, 2, 1) @ model.gravity)).sum(axis=0)
    pose = Pose(cd.ee_pos, matrix_to_quat(cd.ee_rot))
    return DynamicsEval(pose, cd.ee_rot, j1, mass, cor, grav, dm)


def forward_dynamics_step(
    model: RobotModel,
    state: JointState,
    tau: np.ndarray,
    tau_ext: np.ndarray,
    dt: float,
    eval_: DynamicsEval | None = None,
) -> JointState:
    """Advance one control period with semi-implicit Euler.

    Velocities integrate from the acceleration at the current state; positions
    integrate with the updated velocities. ``eval_`` may carry a precomputed
    :func:`evaluate_dynamics` bundle for the same state.
    """
    if not (0.0 < dt <= MAX_TIMESTEP):
        raise ValueError(f"timestep {dt} outside (0, {MAX_TIMESTEP}]")
    tau = np.asarray(tau, dtype=float)
    tau_ext = np.asarray(tau_ext, dtype=float)
    if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(tau_ext))):
        raise ValueError("non-finite torque, step rejected")
    if eval_ is None:
        m = mass_matrix(model, state.q)
        c = coriolis_matrix(model, state.q, state.qd)
        g = gravity_vector(model, state.q)
    else:
        m, c, g = eval_.mass, eval_.coriolis, eval_.gravity
    qdd = np.linalg.solve(m, tau + tau_ext - c @ state.qd - g)
    qd_new = state.qd + dt * qdd
    q_new = state.q + dt * qd_new
    return JointState(q_new, qd_new)
