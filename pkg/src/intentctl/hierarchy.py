"""Two-level task hierarchy with inertia-weighted decoupling.

Level 1 is the 6-DOF end-effector pose, level 2 the first joint angle,
driven through the null space of level 1. The null-space basis comes from
an SVD of the main Jacobian; weighting by the joint-space inertia makes
the two levels exchange no acceleration, so a torque commanded for one
task cannot disturb the other. The decomposition also produces the
decoupled inertia (block-diagonal) and the decoupled Coriolis matrix used
by the inertial coupling compensation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsEval, evaluate_dynamics, jacobian_secondary
from .model import JointState, RobotModel

LOG = logging.getLogger(__name__)

# singular-value ratio below which the main Jacobian counts as rank deficient
RANK_RTOL = 1e-8
# added to the diagonal of the task-space inertia inverse when near singular
DAMPING = 1e-6
# entries smaller than this do not pin the null-basis sign
SIGN_EPS = 1e-9


class SingularityError(RuntimeError):
    """The main-task Jacobian lost row rank; the hierarchy is undefined."""

    def __init__(self, message: str, configuration: np.ndarray | None = None):
        super().__init__(message)
        self.configuration = (
            None if configuration is None else np.array(configuration, dtype=float)
        )


def null_basis(j1: np.ndarray, configuration: np.ndarray | None = None,
               svd: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Orthonormal row basis of the null space of ``j1``.

    SVD leaves the sign of each basis vector arbitrary, which would make the
    decomposition jump between control cycles. The first entry of each row
    whose magnitude exceeds a small floor is made positive instead. A caller
    that already decomposed ``j1`` can hand in ``svd=(s, vt)``.
    """
    j1 = np.asarray(j1, dtype=float)
    m = j1.shape[0]
    s, vt = np.linalg.svd(j1)[1:] if svd is None else svd
    if s[0] == 0.0 or s[-1] < RANK_RTOL * s[0]:
        ratio = 0.0 if s[0] == 0.0 else s[-1] / s[0]
        raise SingularityError(
            f"main-task jacobian is rank deficient (singular value ratio {ratio:.3e})",
            configuration,
        )
    z = vt[m:].copy()
    for row in z:
        for value in row:
            if abs(value) > SIGN_EPS:
                if value < 0.0:
                    row *= -1.0
                break
    return z


def dyn_consistent_inverse(j1: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """Inertia-weighted pseudoinverse of a task Jacobian.

    Near a singular configuration the task-space inertia inverse is
    regularized instead of aborting; the supervisor must keep running at
    workspace edges, so availability wins over precision there.
    """
    j1 = np.asarray(j1, dtype=float)
    minv_jt = np.linalg.solve(mass, j1.T)
    a = j1 @ minv_jt
    a = 0.5 * (a + a.T)
    w = np.linalg.eigvalsh(a)
    if w[0] <= RANK_RTOL * w[-1]:
        LOG.warning(
            "task-space inertia near singular (eigenvalue ratio %.3e); "
            "damped regularization applied",
            w[0] / w[-1] if w[-1] > 0.0 else 0.0,
        )
        a = a + DAMPING * np.eye(a.shape[0])
    return np.linalg.solve(a, minv_jt.T).T


@dataclass(frozen=True)
class HierarchyDecomposition:
    """All blocks of the decoupled two-level task representation."""

    j1: np.ndarray        # (6, n) main-task Jacobian
    j2: np.ndarray        # (1, n) posture selector
    jbar1: np.ndarray     # (6, n) decoupled main Jacobian (= j1 at level 1)
    jbar2: np.ndarray     # (1, n) decoupled posture Jacobian
    z1: np.ndarray        # (6, n) transpose of the inertia-weighted inverse
    z2: np.ndarray        # (1, n) null-space row basis
    jbar: np.ndarray      # (n, n) stacked decoupled Jacobian
    jbar_inv: np.ndarray  # (n, n) its inverse, assembled as [z1.T  z2.T]
    lam: np.ndarray       # (n, n) decoupled inertia, block-diagonal
    mu11: np.ndarray      # (6, 6) decoupled Coriolis blocks
    mu12: np.ndarray      # (6, 1)
    mu21: np.ndarray      # (1, 6)
    mu22: np.ndarray      # (1, 1)
    v1: np.ndarray        # (6,) main-task velocity
    v2: np.ndarray        # (1,) decoupled posture velocity


class HierarchyContext:
    """Per-simulation cache for differencing the stacked Jacobian.

    The decoupled Coriolis matrix needs the time derivative of the stacked
    Jacobian. An analytic derivative of an SVD basis is ill-conditioned, so
    a backward difference over the control period is used; the first step
    takes the derivative as zero. One context belongs to one stepping loop.
    """

    def __init__(self, dt: float):
        if dt <= 0.0:
            raise ValueError("control period must be positive")
        self.dt = float(dt)
        self._prev_jbar: np.ndarray | None = None

    def reset(self) -> None:
        self._prev_jbar = None


def decouple(
    model: RobotModel,
    state: JointState,
    context: HierarchyContext | None = None,
    eval_: DynamicsEval | None = None,
    svd: tuple[np.ndarray, np.ndarray] | None = None,
) -> HierarchyDecomposition:
    """Build the decoupled hierarchy at the given state.

    ``eval_`` may carry a precomputed dynamics bundle for the same state so
    the control loop evaluates the model only once per cycle, and ``svd``
    a matching decomposition of its Jacobian. Without a ``context`` the
    Jacobian derivative is taken as zero.
    """
    if eval_ is None:
        eval_ = evaluate_dynamics(model, state)
    mass, j1 = eval_.mass, eval_.j1
    m1 = j1.shape[0]

    z2 = null_basis(j1, configuration=state.q, svd=svd)
    jbar1_mplus = dyn_consistent_inverse(j1, mass)
    z1 = jbar1_mplus.T
    jbar2 = np.linalg.solve(z2 @ mass @ z2.T, z2 @ mass)
    jbar = np.vstack((j1, jbar2))
    jbar_inv = np.hstack((jbar1_mplus, z2.T))
    lam = jbar_inv.T @ mass @ jbar_inv

    if context is not None and context._prev_jbar is not None:
        jbar_dot = (jbar - context._prev_jbar) / context.dt
        mu = (jbar_inv.T @ eval_.coriolis - lam @ jbar_dot) @ jbar_inv
    else:
        mu = jbar_inv.T @ eval_.coriolis @ jbar_inv
    if context is not None:
        context._prev_jbar = jbar

    # The exact decoupled Coriolis has opposed coupling blocks, which is what
    # makes the compensation torque powerless. Finite differencing breaks the
    # opposition slightly, so it is restored structurally.
    mu12 = 0.5 * (mu[:m1, m1:] - mu[m1:, :m1].T)

    v = jbar @ state.qd
    return HierarchyDecomposition(
        j1=j1,
        j2=jacobian_secondary(model),
        jbar1=j1,
        jbar2=jbar2,
        z1=z1,
        z2=z2,
        jbar=jbar,
        jbar_inv=jbar_inv,
        lam=lam,
        mu11=mu[:m1, :m1],
        mu12=mu12,
        mu21=-mu12.T,
        mu22=mu[m1:, m1:],
        v1=v[:m1],
        v2=v[m1:],
    )
