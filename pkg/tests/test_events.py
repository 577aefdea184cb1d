"""Scripted interaction events and their ground-truth signal profiles."""

import math

import numpy as np
import pytest

from intentctl.events import (
    FAR_DISTANCE,
    EventTimeline,
    HumanEvent,
    _bump,
    _ramp,
    _smooth,
)
from intentctl.model import Pose
from intentctl.rotations import quat_from_axis_angle

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])
NECK = Pose(np.zeros(3), IDENTITY)


def probe_at(y=0.2):
    return Pose(np.array([0.0, y, 0.0]), IDENTITY)


class TestHumanEventValidation:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            HumanEvent("Tickle", 0.0, 1.0)

    def test_rejects_inverted_window(self):
        with pytest.raises(ValueError, match="start"):
            HumanEvent("PushProbe", 2.0, 1.0)

    def test_rejects_non_finite_parameters(self):
        with pytest.raises(ValueError, match="force"):
            HumanEvent("PushProbe", 0.0, 1.0,
                       {"force": [0.0, math.nan, 0.0]})

    def test_window_clamps(self):
        e = HumanEvent("PushProbe", 1.0, 3.0, {"force": [1.0, 0.0, 0.0]})
        assert e.window(0.0) == 0.0
        assert e.window(2.0) == 0.5
        assert e.window(5.0) == 1.0


class TestProfiles:
    def test_ramp_endpoints(self):
        assert _ramp(0.0) == 0.0 and _ramp(1.0) == 1.0
        assert _ramp(0.5) == pytest.approx(0.5)
        assert _ramp(-1.0) == 0.0 and _ramp(2.0) == 1.0

    def test_bump_returns_to_zero(self):
        assert _bump(0.0) == 0.0 and _bump(1.0) == pytest.approx(0.0, abs=1e-15)
        assert _bump(0.5) == pytest.approx(1.0)

    def test_smooth_is_quintic(self):
        assert _smooth(0.2) == pytest.approx(0.05792, abs=1e-12)
        assert _smooth(1.0) == 1.0


class TestHandDistance:
    def timeline(self):
        grasp = HumanEvent("GraspProbe", 2.0, 8.0,
                           {"approach_s": 1.5, "drag": [0.08, 0.0, 0.0]})
        release = HumanEvent("ReleaseProbe", 8.0, 9.5)
        return EventTimeline([grasp, release], 7)

    def test_far_before_grasp(self):
        assert self.timeline().hand_distance(0.0) == FAR_DISTANCE

    def test_approach_reaches_near(self):
        tl = self.timeline()
        d_mid = tl.hand_distance(2.75)
        assert 0.02 < d_mid < FAR_DISTANCE
        assert tl.hand_distance(3.5) == pytest.approx(0.02)
        assert tl.hand_distance(7.0) == pytest.approx(0.02)

    def test_monotone_during_approach(self):
        tl = self.timeline()
        samples = [tl.hand_distance(2.0 + 1.5 * u) for u in
                   np.linspace(0.0, 1.0, 50)]
        assert all(b <= a + 1e-12 for a, b in zip(samples, samples[1:]))

    def test_release_returns_far(self):
        tl = self.timeline()
        assert tl.hand_distance(8.75) == pytest.approx(
            0.02 + (FAR_DISTANCE - 0.02) * 0.5)
        assert tl.hand_distance(9.5) == FAR_DISTANCE
        assert tl.hand_distance(20.0) == FAR_DISTANCE

    def test_grasp_without_release_holds(self):
        tl = EventTimeline(
            [HumanEvent("GraspProbe", 1.0, 2.0, {"approach_s": 0.5})], 7)
        assert tl.hand_distance(100.0) == pytest.approx(0.02)


class TestGraspWrench:
    def test_zero_at_anchor_capture(self):
        tl = EventTimeline(
            [HumanEvent("GraspProbe", 1.0, 5.0, {"drag": [0.1, 0.0, 0.0]})], 7)
        w = tl.grasp_wrench(1.0, probe_at(), np.zeros(6), NECK)
        np.testing.assert_allclose(w, np.zeros(6), atol=1e-12)

    def test_spring_pulls_toward_dragged_hand(self):
        tl = EventTimeline(
            [HumanEvent("GraspProbe", 0.0, 4.0, {"drag": [0.1, 0.0, 0.0]})], 7)
        tl.grasp_wrench(0.0, probe_at(), np.zeros(6), NECK)
        # end of the drag ramp: hand at full offset, hand velocity zero
        w = tl.grasp_wrench(4.0, probe_at(), np.zeros(6), NECK)
        assert w[0] == pytest.approx(300.0 * 0.1, rel=1e-9)
        assert np.all(w[3:] == 0.0)

    def test_moving_hand_adds_damping(self):
        tl = EventTimeline(
            [HumanEvent("GraspProbe", 0.0, 4.0, {"drag": [0.1, 0.0, 0.0]})], 7)
        tl.grasp_wrench(0.0, probe_at(), np.zeros(6), NECK)
        w = tl.grasp_wrench(2.0, probe_at(), np.zeros(6), NECK)
        # half way: spring at half drag plus damping on the hand velocity
        hand_speed = 0.1 * (math.pi / (2.0 * 4.0))
        assert w[0] == pytest.approx(300.0 * 0.05 + 40.0 * hand_speed,
                                     rel=1e-9)

    def test_damping_resists_probe_velocity(self):
        tl = EventTimeline([HumanEvent("GraspProbe", 0.0, 4.0, {})], 7)
        tl.grasp_wrench(0.0, probe_at(), np.zeros(6), NECK)
        vel = np.zeros(6)
        vel[1] = 0.5
        w = tl.grasp_wrench(0.0, probe_at(), vel, NECK)
        assert w[1] == pytest.approx(-40.0 * 0.5)

    def test_radial_out_drag_resolved_at_capture(self):
        tl = EventTimeline(
            [HumanEvent("GraspProbe", 0.0, 2.0,
                        {"direction": "radial_out", "drag": "radial_out",
                         "magnitude": 0.08})], 7)
        tl.grasp_wrench(0.0, probe_at(y=0.2), np.zeros(6), NECK)
        w = tl.grasp_wrench(2.0, probe_at(y=0.2), np.zeros(6), NECK)
        # outward from the x-axis cylinder at +y is +y
        assert w[1] == pytest.approx(300.0 * 0.08, rel=1e-9)
        assert abs(w[0]) < 1e-12 and abs(w[2]) < 1e-12

    def test_released_hand_lets_go(self):
        grasp = HumanEvent("GraspProbe", 0.0, 4.0, {"drag": [0.1, 0.0, 0.0]})
        release = HumanEvent("ReleaseProbe", 3.0, 4.0)
        tl = EventTimeline([grasp, release], 7)
        tl.grasp_wrench(0.0, probe_at(), np.zeros(6), NECK)
        w = tl.grasp_wrench(3.0, probe_at(), np.zeros(6), NECK)
        np.testing.assert_allclose(w, np.zeros(6))

    def test_reset_forgets_anchors(self):
        tl = EventTimeline(
            [HumanEvent("GraspProbe", 0.0, 2.0, {"drag": [0.1, 0.0, 0.0]})], 7)
        tl.grasp_wrench(0.0, probe_at(), np.zeros(6), NECK)
        tl.reset()
        w = tl.grasp_wrench(2.0, probe_at(), np.zeros(6), NECK)
        # new anchor at the current probe position, hand at full drag
        assert w[0] == pytest.approx(300.0 * 0.1, rel=1e-9)


class TestPushWrench:
    def test_raised_cosine_profile(self):
        tl = EventTimeline(
            [HumanEvent("PushProbe", 1.0, 2.0,
                        {"force": [0.0, 30.0, 0.0]})], 7)
        assert np.all(tl.push_wrench(0.5, probe_at(), NECK) == 0.0)
        mid = tl.push_wrench(1.5, probe_at(), NECK)
        assert mid[1] == pytest.approx(30.0)
        quarter = tl.push_wrench(1.25, probe_at(), NECK)
        assert quarter[1] == pytest.approx(15.0)
        assert np.all(tl.push_wrench(2.0, probe_at(), NECK) == 0.0)

    def test_radial_out_direction(self):
        tl = EventTimeline(
            [HumanEvent("PushProbe", 0.0, 1.0,
                        {"force": "radial_out", "magnitude": 20.0})], 7)
        w = tl.push_wrench(0.5, probe_at(y=0.3), NECK)
        assert w[1] == pytest.approx(20.0)


class TestBodyState:
    def test_approach_dips_and_recovers(self):
        tl = EventTimeline(
            [HumanEvent("BodyApproach", 5.0, 8.0,
                        {"side": "left", "min_distance": 0.12})], 7)
        far, side, torque = tl.body_state(0.0)
        assert far == FAR_DISTANCE and np.all(torque == 0.0)
        d, side, _ = tl.body_state(6.5)
        assert d == pytest.approx(0.12)
        assert side == -1.0
        d_late, _, _ = tl.body_state(7.9)
        assert d_late > 0.12

    def test_contact_torque_profile(self):
        tl = EventTimeline(
            [HumanEvent("BodyContact", 1.0, 3.0,
                        {"joint": 3, "torque": 2.0, "side": "right"})], 7)
        _, side, torque = tl.body_state(2.0)
        assert torque[2] == pytest.approx(2.0)
        assert np.all(torque[[0, 1, 3, 4, 5, 6]] == 0.0)
        assert side == 1.0
        d, _, _ = tl.body_state(2.0)
        assert d == pytest.approx(0.05)

    def test_contact_joint_bounds(self):
        tl = EventTimeline(
            [HumanEvent("BodyContact", 0.0, 1.0,
                        {"joint": 9, "torque": 1.0})], 7)
        with pytest.raises(ValueError, match="joint"):
            tl.body_state(0.5)


class TestNeckDisplacement:
    def test_smooth_and_persistent(self):
        tl = EventTimeline(
            [HumanEvent("PatientMove", 2.0, 4.0,
                        {"displacement": [0.045, 0.0, 0.0],
                         "frame": "world"})], 7)
        assert np.all(tl.neck_displacement(1.0, NECK) == 0.0)
        np.testing.assert_allclose(tl.neck_displacement(3.0, NECK),
                                   [0.0225, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(tl.neck_displacement(10.0, NECK),
                                   [0.045, 0.0, 0.0], atol=1e-15)

    def test_neck_frame_displacement_uses_base_orientation(self):
        yawed = Pose(np.zeros(3),
                     quat_from_axis_angle(np.array([0.0, 0.0, 1.0]),
                                          np.pi / 2))
        tl = EventTimeline(
            [HumanEvent("PatientMove", 0.0, 1.0,
                        {"displacement": [0.045, 0.0, 0.0]})], 7)
        np.testing.assert_allclose(tl.neck_displacement(2.0, yawed),
                                   [0.0, 0.045, 0.0], atol=1e-12)
