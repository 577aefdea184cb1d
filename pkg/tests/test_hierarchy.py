"""Identity and property tests for the two-level task decomposition."""

import logging

import numpy as np
import pytest

from intentctl import JointState
from intentctl.dynamics import DynamicsEval, evaluate_dynamics, jacobian_main
from intentctl.hierarchy import (
    HierarchyContext,
    SingularityError,
    decouple,
    dyn_consistent_inverse,
    null_basis,
)
from intentctl.model import Pose


def random_states(n_states, seed=11, span=2.5):
    rng = np.random.default_rng(seed)
    for _ in range(n_states):
        yield JointState(rng.uniform(-span, span, 7), rng.uniform(-1.0, 1.0, 7))


class TestNullBasis:
    def test_canonical_selector(self):
        j1 = np.hstack([np.eye(6), np.zeros((6, 1))])
        z2 = null_basis(j1)
        assert z2.shape == (1, 7)
        np.testing.assert_allclose(z2, [[0, 0, 0, 0, 0, 0, 1.0]], atol=1e-12)

    def test_annihilates_and_orthonormal(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            j1 = rng.normal(size=(6, 7))
            z2 = null_basis(j1)
            assert np.linalg.norm(j1 @ z2.T) < 1e-9
            np.testing.assert_allclose(z2 @ z2.T, np.eye(1), atol=1e-12)

    def test_sign_convention(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            z2 = null_basis(rng.normal(size=(6, 7)))
            lead = z2[0][np.abs(z2[0]) > 1e-9][0]
            assert lead > 0.0

    def test_rank_deficient_raises(self):
        j1 = np.random.default_rng(5).normal(size=(6, 7))
        j1[3] = 0.0
        q = np.arange(7.0)
        with pytest.raises(SingularityError) as info:
            null_basis(j1, configuration=q)
        np.testing.assert_array_equal(info.value.configuration, q)

    def test_all_zero_matrix_raises(self):
        with pytest.raises(SingularityError):
            null_basis(np.zeros((6, 7)))


class TestDynConsistentInverse:
    def test_right_inverse_over_random_inertias(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            j1 = rng.normal(size=(6, 7))
            a = rng.normal(size=(7, 7))
            mass = a @ a.T + 0.5 * np.eye(7)
            pinv = dyn_consistent_inverse(j1, mass)
            worst = max(worst, np.linalg.norm(j1 @ pinv - np.eye(6)))
        assert worst < 1e-9

    def test_near_singular_damps_with_warning(self, caplog):
        rng = np.random.default_rng(8)
        j1 = rng.normal(size=(6, 7))
        j1[5] = j1[4] + 1e-12 * rng.normal(size=7)
        with caplog.at_level(logging.WARNING, logger="intentctl.hierarchy"):
            pinv = dyn_consistent_inverse(j1, np.eye(7))
        assert np.all(np.isfinite(pinv))
        assert any("regularization" in r.message for r in caplog.records)


class TestDecouple:
    def test_identity_battery(self, arm):
        worst = dict.fromkeys(
            ["annihilate", "cross_inertia", "inv1", "inv2", "stacked", "lam_offdiag",
             "transparency"], 0.0)
        for state in random_states(200):
            ev = evaluate_dynamics(arm, state)
            d = decouple(arm, state, eval_=ev)
            minv = np.linalg.inv(ev.mass)
            worst["annihilate"] = max(
                worst["annihilate"], np.linalg.norm(d.j1 @ d.z2.T))
            worst["cross_inertia"] = max(
                worst["cross_inertia"], np.linalg.norm(d.z1 @ ev.mass @ d.z2.T))
            worst["inv1"] = max(
                worst["inv1"], np.linalg.norm(d.z1 @ d.jbar1.T - np.eye(6)))
            worst["inv2"] = max(
                worst["inv2"], np.linalg.norm(d.z2 @ d.jbar2.T - np.eye(1)))
            worst["stacked"] = max(
                worst["stacked"], np.linalg.norm(d.jbar @ d.jbar_inv - np.eye(7)))
            off = np.linalg.norm(d.lam[:6, 6:]) + np.linalg.norm(d.lam[6:, :6])
            worst["lam_offdiag"] = max(
                worst["lam_offdiag"], off / np.linalg.norm(d.lam))
            worst["transparency"] = max(
                worst["transparency"], np.linalg.norm(d.jbar1 @ minv @ d.jbar2.T))
        assert worst["annihilate"] < 1e-9
        assert worst["cross_inertia"] < 1e-9
        assert worst["inv1"] < 1e-9
        assert worst["inv2"] < 1e-9
        assert worst["stacked"] < 1e-9
        assert worst["lam_offdiag"] < 1e-8
        assert worst["transparency"] < 1e-9

    def test_main_task_velocity(self, arm):
        for state in random_states(20, seed=12):
            d = decouple(arm, state)
            np.testing.assert_array_equal(d.v1, jacobian_main(arm, state.q) @ state.qd)

    def test_coupling_blocks_opposed(self, arm):
        state = next(iter(random_states(1, seed=13)))
        d = decouple(arm, state)
        np.testing.assert_array_equal(d.mu21, -d.mu12.T)
        power = float(d.v1 @ d.mu12 @ d.v2 + d.v2 @ d.mu21 @ d.v1)
        assert abs(power) < 1e-12

    def test_continuity_along_smooth_path(self, arm):
        rng = np.random.default_rng(14)
        q0 = rng.uniform(-1.0, 1.0, 7)
        amp = rng.uniform(0.1, 0.3, 7)
        phase = rng.uniform(0.0, 2 * np.pi, 7)
        prev = None
        for k in range(500):
            t = 1e-3 * k
            q = q0 + amp * np.sin(2 * np.pi * 0.5 * t + phase)
            d = decouple(arm, JointState(q, np.zeros(7)))
            if prev is not None:
                assert np.max(np.abs(d.z2 - prev)) < 0.01
            prev = d.z2

    def test_backward_difference_via_context(self, arm):
        dt = 1e-3
        states = list(random_states(2, seed=15, span=1.0))
        s0 = states[0]
        s1 = JointState(s0.q + dt * s0.qd, states[1].qd)
        ctx = HierarchyContext(dt)

        d0 = decouple(arm, s0, context=ctx)
        ev0 = evaluate_dynamics(arm, s0)
        mu0 = d0.jbar_inv.T @ ev0.coriolis @ d0.jbar_inv
        np.testing.assert_allclose(d0.mu11, mu0[:6, :6], atol=1e-12)

        d1 = decouple(arm, s1, context=ctx)
        ev1 = evaluate_dynamics(arm, s1)
        jbar_dot = (d1.jbar - d0.jbar) / dt
        mu1 = (d1.jbar_inv.T @ ev1.coriolis - d1.lam @ jbar_dot) @ d1.jbar_inv
        np.testing.assert_allclose(d1.mu11, mu1[:6, :6], atol=1e-12)
        np.testing.assert_allclose(
            d1.mu12, 0.5 * (mu1[:6, 6:] - mu1[6:, :6].T), atol=1e-12)

        ctx.reset()
        d2 = decouple(arm, s1, context=ctx)
        mu2 = d2.jbar_inv.T @ ev1.coriolis @ d2.jbar_inv
        np.testing.assert_allclose(d2.mu11, mu2[:6, :6], atol=1e-12)

    def test_context_rejects_bad_period(self):
        with pytest.raises(ValueError):
            HierarchyContext(0.0)

    def test_singularity_propagates(self, arm):
        state = JointState(np.zeros(7), np.zeros(7))
        j1 = np.zeros((6, 7))
        j1[:5, :5] = np.eye(5)
        fake = DynamicsEval(
            pose=Pose(np.zeros(3), np.array([1.0, 0, 0, 0])),
            ee_rot=np.eye(3),
            j1=j1,
            mass=np.eye(7),
            coriolis=np.zeros((7, 7)),
            gravity=np.zeros(7),
            mass_grad=np.zeros((7, 7, 7)),
        )
        with pytest.raises(SingularityError) as info:
            decouple(arm, state, eval_=fake)
        np.testing.assert_array_equal(info.value.configuration, state.q)
