"""Controller tests: powerless coupling, transparency, scheduling, closed loop."""

import logging

import numpy as np
import pytest

from intentctl import JointState
from intentctl.controller import (
    K1G_DEFAULT,
    K2G_DEFAULT,
    TaskTargets,
    compensation_torque,
    make_impedance,
    schedule_stiffness,
    task_error,
    task_torques,
    total_control,
)
from intentctl.dynamics import evaluate_dynamics, forward_dynamics_step
from intentctl.hierarchy import HierarchyContext, HierarchyDecomposition, decouple
from intentctl.model import Pose
from intentctl.weighting import Factors


Q_HOME = np.array([0.0, -0.6, 0.0, 1.2, 0.0, 0.9, 0.0])


def factors(a_h=0.0, a_p=0.0, a_f=0.0, a_n=0.0, a_b=0.0):
    return Factors(a_h=a_h, a_p=a_p, a_f=a_f, a_n=a_n, a_b=a_b)


def smooth_states(count, seed=31):
    rng = np.random.default_rng(seed)
    q0 = rng.uniform(-1.2, 1.2, 7)
    amp = rng.uniform(0.2, 0.5, 7)
    phase = rng.uniform(0.0, 2 * np.pi, 7)
    w = 2 * np.pi * rng.uniform(0.2, 0.6, 7)
    for k in range(count):
        t = 1e-3 * k
        q = q0 + amp * np.sin(w * t + phase)
        qd = amp * w * np.cos(w * t + phase)
        yield JointState(q, qd)


class TestCompensationTorque:
    def test_rest_gives_zero(self, arm):
        d = decouple(arm, JointState(Q_HOME, np.zeros(7)))
        np.testing.assert_array_equal(compensation_torque(d), np.zeros(7))

    def test_zero_power_over_trajectory(self, arm):
        ctx = HierarchyContext(1e-3)
        worst = 0.0
        for state in smooth_states(1000):
            d = decouple(arm, state, context=ctx)
            tau_d = compensation_torque(d)
            num = abs(float(tau_d @ state.qd))
            den = np.linalg.norm(tau_d) * np.linalg.norm(state.qd) + 1e-12
            worst = max(worst, num / den)
        assert worst < 1e-10

    def test_decoupled_blocks_give_zero(self):
        rng = np.random.default_rng(32)
        d = HierarchyDecomposition(
            j1=rng.normal(size=(6, 7)), j2=rng.normal(size=(1, 7)),
            jbar1=rng.normal(size=(6, 7)), jbar2=rng.normal(size=(1, 7)),
            z1=rng.normal(size=(6, 7)), z2=rng.normal(size=(1, 7)),
            jbar=np.eye(7), jbar_inv=np.eye(7), lam=np.eye(7),
            mu11=rng.normal(size=(6, 6)), mu12=np.zeros((6, 1)),
            mu21=np.zeros((1, 6)), mu22=rng.normal(size=(1, 1)),
            v1=rng.normal(size=6), v2=rng.normal(size=1))
        np.testing.assert_array_equal(compensation_torque(d), np.zeros(7))


class TestTaskTorques:
    def test_equilibrium_zero(self, arm):
        state = JointState(Q_HOME, np.zeros(7))
        ev = evaluate_dynamics(arm, state)
        d = decouple(arm, state, eval_=ev)
        params = make_impedance(K1G_DEFAULT, K2G_DEFAULT)
        targets = TaskTargets.hold(ev.pose, state.q[0])
        tau_1, tau_2 = task_torques(d, targets, params, state, ev.pose)
        np.testing.assert_allclose(tau_1, np.zeros(7), atol=1e-12)
        np.testing.assert_allclose(tau_2, np.zeros(7), atol=1e-12)

    def test_zero_stiffness_ignores_error(self, arm):
        state = JointState(Q_HOME, np.zeros(7))
        ev = evaluate_dynamics(arm, state)
        d = decouple(arm, state, eval_=ev)
        params = schedule_stiffness(factors(a_h=1.0))
        off_target = Pose(ev.pose.position + np.array([0.3, -0.2, 0.1]),
                          np.array([0.0, 0.0, 1.0, 0.0]))
        tau_1, tau_2 = task_torques(d, TaskTargets.hold(off_target, 1.0),
                                    params, state, ev.pose)
        np.testing.assert_array_equal(tau_1, np.zeros(7))
        np.testing.assert_array_equal(tau_2, np.zeros(7))

    def test_posture_torque_transparent_to_main_task(self, arm):
        rng = np.random.default_rng(33)
        params = make_impedance(K1G_DEFAULT, K2G_DEFAULT)
        worst = 0.0
        for state in smooth_states(200, seed=34):
            ev = evaluate_dynamics(arm, state)
            d = decouple(arm, state, eval_=ev)
            targets = TaskTargets.hold(ev.pose, state.q[0] + rng.uniform(-1, 1))
            _, tau_2 = task_torques(d, targets, params, state, ev.pose)
            minv_t2 = np.linalg.solve(ev.mass, tau_2)
            worst = max(worst,
                        np.linalg.norm(d.jbar1 @ minv_t2)
                        / (np.linalg.norm(tau_2) + 1e-300))
        assert worst < 1e-9


class TestScheduleStiffness:
    def test_idle_factors_give_ceiling(self):
        p = schedule_stiffness(factors())
        np.testing.assert_array_equal(np.diag(p.K1), K1G_DEFAULT)
        assert p.K2 == K2G_DEFAULT

    def test_hand_contact_softens_everything(self):
        p = schedule_stiffness(factors(a_h=1.0))
        np.testing.assert_array_equal(np.diag(p.K1), np.zeros(6))
        assert p.K2 == 0.0

    def test_critical_damping(self):
        p = make_impedance(np.full(6, 100.0), 100.0)
        np.testing.assert_allclose(np.diag(p.D1), np.full(6, 20.0))
        assert p.D2 == pytest.approx(20.0)
        rng = np.random.default_rng(35)
        for _ in range(100):
            p = schedule_stiffness(factors(*rng.uniform(0, 1, 5)))
            np.testing.assert_allclose(
                np.diag(p.D1) ** 2, 4.0 * np.diag(p.K1), atol=1e-12)
            assert abs(p.D2**2 - 4.0 * p.K2) < 1e-12

    def test_out_of_range_factor_clamped_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="intentctl.controller"):
            p = schedule_stiffness(factors(a_f=1.5))
        np.testing.assert_array_equal(np.diag(p.K1), np.zeros(6))
        assert any("clamped" in r.message for r in caplog.records)

    def test_slew_bounded_by_factor_motion(self):
        rng = np.random.default_rng(36)
        for _ in range(500):
            a = rng.uniform(0, 1, 5)
            b = np.clip(a + rng.uniform(-0.05, 0.05, 5), 0.0, 1.0)
            ka = np.diag(schedule_stiffness(factors(*a)).K1)
            kb = np.diag(schedule_stiffness(factors(*b)).K1)
            budget = K1G_DEFAULT * np.sum(np.abs(b - a))
            assert np.all(np.abs(kb - ka) <= budget + 1e-12)


class TestTotalControl:
    def _setup(self, arm):
        state = JointState(Q_HOME, np.zeros(7))
        ev = evaluate_dynamics(arm, state)
        d = decouple(arm, state, eval_=ev)
        params = make_impedance(K1G_DEFAULT, K2G_DEFAULT)
        targets = TaskTargets.hold(ev.pose, state.q[0])
        return state, ev, d, params, targets

    def test_equilibrium_is_gravity(self, arm):
        state, ev, d, params, targets = self._setup(arm)
        cmd = total_control(d, targets, params, state, ev.pose, ev.gravity,
                            np.zeros(7))
        np.testing.assert_allclose(cmd.tau, ev.gravity, atol=1e-12)

    def test_flag_off_ignores_external(self, arm):
        state, ev, d, params, targets = self._setup(arm)
        a = total_control(d, targets, params, state, ev.pose, ev.gravity,
                          np.zeros(7))
        b = total_control(d, targets, params, state, ev.pose, ev.gravity,
                          np.full(7, 3.7))
        np.testing.assert_array_equal(a.tau, b.tau)

    def test_flag_on_subtracts_external(self, arm):
        state, ev, d, params, targets = self._setup(arm)
        tau_e = np.full(7, 1.5)
        cmd = total_control(d, targets, params, state, ev.pose, ev.gravity,
                            tau_e, compensate_external=True)
        np.testing.assert_array_equal(
            cmd.tau, (((cmd.tau_g + cmd.tau_d) + cmd.tau_1) + cmd.tau_2) - tau_e)

    def test_sum_invariant_bit_exact(self, arm):
        rng = np.random.default_rng(37)
        params = make_impedance(K1G_DEFAULT, K2G_DEFAULT)
        for state in smooth_states(50, seed=38):
            ev = evaluate_dynamics(arm, state)
            d = decouple(arm, state, eval_=ev)
            target = Pose(ev.pose.position + rng.uniform(-0.05, 0.05, 3),
                          ev.pose.quat)
            cmd = total_control(d, TaskTargets.hold(target, 0.3), params,
                                state, ev.pose, ev.gravity, np.zeros(7))
            np.testing.assert_array_equal(
                cmd.tau, ((cmd.tau_g + cmd.tau_d) + cmd.tau_1) + cmd.tau_2)

    def test_non_finite_component_named(self, arm):
        state, ev, d, params, targets = self._setup(arm)
        bad = ev.gravity.copy()
        bad[2] = np.nan
        with pytest.raises(ValueError, match="tau_g"):
            total_control(d, targets, params, state, ev.pose, bad, np.zeros(7))


class TestRegulationConvergence:
    def test_error_decays_and_storage_non_increasing(self, arm):
        dt = 1e-3
        state = JointState(Q_HOME, np.zeros(7))
        ev = evaluate_dynamics(arm, state)
        target = Pose(ev.pose.position + np.array([0.05, 0.0, 0.0]),
                      ev.pose.quat)
        targets = TaskTargets.hold(target, state.q[0])
        params = make_impedance(K1G_DEFAULT, K2G_DEFAULT)
        ctx = HierarchyContext(dt)

        def storage(state, ev, err1):
            err2 = state.q[0] - targets.x_2d
            return float(0.5 * err1 @ params.K1 @ err1
                         + 0.5 * params.K2 * err2 * err2
                         + 0.5 * state.qd @ ev.mass @ state.qd)

        v_prev = None
        for _ in range(5000):
            ev = evaluate_dynamics(arm, state)
            d = decouple(arm, state, context=ctx, eval_=ev)
            cmd = total_control(d, targets, params, state, ev.pose, ev.gravity,
                                np.zeros(7))
            v_now = storage(state, ev, task_error(ev.pose, target))
            if v_prev is not None:
                assert v_now <= v_prev + 1e-6
            v_prev = v_now
            state = forward_dynamics_step(arm, state, cmd.tau, np.zeros(7), dt,
                                          eval_=ev)

        final = evaluate_dynamics(arm, state)
        err = task_error(final.pose, target)
        assert np.linalg.norm(err[:3]) < 1e-4
