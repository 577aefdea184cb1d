"""Scripted human interactions: the doctor's hand and body, patient motion.

Every event is a time window plus parameters; the timeline turns the active
windows into smooth ground-truth signals (hand distance, body distance,
joint torques, wrenches, neck displacement). All profiles are deterministic
functions of time, so replaying a scenario reproduces every byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .model import Pose
from .rotations import quat_rotate

EVENT_KINDS = frozenset({
    "GraspProbe", "ReleaseProbe", "BodyContact",
    "BodyApproach", "PatientMove", "PushProbe",
})

FAR_DISTANCE = 1.0       # m, hand/body distance when nobody is near
GRASP_SPRING = 300.0     # N/m, hand holding the probe
GRASP_DAMPING = 40.0     # N s/m, grip losses so guiding does not ring
HAND_NEAR = 0.02         # m, hand-probe distance while grasped


def _check_finite(value, path: str) -> None:
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError(f"event parameter {path} is not finite")
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            _check_finite(item, f"{path}[{i}]")
    elif isinstance(value, Mapping):
        for key, item in value.items():
            _check_finite(item, f"{path}.{key}")
    elif not isinstance(value, str):
        raise ValueError(f"event parameter {path} has unsupported type")


@dataclass(frozen=True)
class HumanEvent:
    kind: str
    start: float
    end: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if not self.start < self.end:
            raise ValueError("event start must precede its end")
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError("event times must be finite")
        _check_finite(self.params, "params")

    def window(self, t: float) -> float:
        """Normalized position of t inside the event, clamped to [0, 1]."""
        return min(max((t - self.start) / (self.end - self.start), 0.0), 1.0)


def _ramp(u: float) -> float:
    # half-cosine 0 -> 1, flat at both ends
    u = min(max(u, 0.0), 1.0)
    return 0.5 - 0.5 * math.cos(math.pi * u)


def _bump(u: float) -> float:
    # full cosine 0 -> 1 -> 0
    u = min(max(u, 0.0), 1.0)
    return 0.5 - 0.5 * math.cos(2.0 * math.pi * u)


def _smooth(u: float) -> float:
    # quintic with zero boundary velocity and acceleration
    u = min(max(u, 0.0), 1.0)
    return ((6.0 * u - 15.0) * u + 10.0) * u**3


def _side_sign(value) -> float:
    if value == "right":
        return 1.0
    if value == "left":
        return -1.0
    return float(value)


def _radial_out(point: np.ndarray, neck: Pose) -> np.ndarray:
    """Unit vector from the neck axis through the point, world frame."""
    axis = quat_rotate(neck.quat, np.array([1.0, 0.0, 0.0]))
    rel = point - neck.position
    radial = rel - (rel @ axis) * axis
    norm = np.linalg.norm(radial)
    if norm < 1e-9:
        raise ValueError("point lies on the neck axis; no radial direction")
    return radial / norm


def _direction(params: Mapping, key: str, point: np.ndarray,
               neck: Pose) -> np.ndarray:
    """Resolve a displacement parameter: explicit vector or 'radial_out'."""
    spec = params[key]
    if isinstance(spec, str):
        if spec != "radial_out":
            raise ValueError(f"unknown direction {spec!r}")
        return _radial_out(point, neck) * float(params["magnitude"])
    return np.asarray(spec, dtype=float).reshape(3)


class EventTimeline:
    """Evaluates the scripted events at a given time.

    Grasp events capture the probe position at the instant they activate
    (the hand closes where the probe is) and keep it until reset, so the
    spring force starts at zero.
    """

    def __init__(self, events: list[HumanEvent], n_joints: int):
        self.events = list(events)
        self.n = int(n_joints)
        self._anchors: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._rebuild()

    def _rebuild(self) -> None:
        releases = sorted((e for e in self.events if e.kind == "ReleaseProbe"),
                          key=lambda e: e.start)
        self._pairs = []
        used = set()
        grasps = (e for e in self.events if e.kind == "GraspProbe")
        for grasp in sorted(grasps, key=lambda e: e.start):
            match = None
            for rel in releases:
                if id(rel) not in used and rel.start >= grasp.start:
                    match = rel
                    used.add(id(rel))
                    break
            self._pairs.append((grasp, match))

    def add(self, event: HumanEvent) -> None:
        """Append a new event and refresh grasp/release pairing.

        Existing event objects keep their identity, so anchors already
        captured for an ongoing grasp stay valid.
        """
        self.events.append(event)
        self._rebuild()

    def reset(self) -> None:
        self._rebuild()
        self._anchors.clear()

    def hand_distance(self, t: float) -> float:
        d = FAR_DISTANCE
        for grasp, release in self._pairs:
            near = float(grasp.params.get("near_distance", HAND_NEAR))
            approach = float(grasp.params.get(
                "approach_s", min(1.5, grasp.end - grasp.start)))
            if t < grasp.start or (release is not None and t >= release.end):
                continue
            if t < grasp.start + approach:
                u = (t - grasp.start) / approach
                d = min(d, FAR_DISTANCE + (near - FAR_DISTANCE) * _ramp(u))
            elif release is None or t < release.start:
                d = min(d, near)
            else:
                u = (t - release.start) / (release.end - release.start)
                d = min(d, near + (FAR_DISTANCE - near) * _ramp(u))
        return d

    def grasp_wrench(self, t: float, probe: Pose, probe_vel: np.ndarray,
                     neck: Pose) -> np.ndarray:
        wrench = np.zeros(6)
        for grasp, release in self._pairs:
            held_until = math.inf if release is None else release.start
            if not grasp.start <= t < held_until:
                continue
            key = id(grasp)
            if key not in self._anchors:
                drag = _direction(grasp.params, "drag", probe.position,
                                  neck) if "drag" in grasp.params \
                    else np.zeros(3)
                self._anchors[key] = (probe.position.copy(), drag)
            anchor, drag = self._anchors[key]
            duration = grasp.end - grasp.start
            u = min(max((t - grasp.start) / duration, 0.0), 1.0)
            hand = anchor + drag * _ramp(u)
            hand_vel = np.zeros(3)
            if 0.0 < u < 1.0:
                hand_vel = drag * (math.pi / (2.0 * duration)) \
                    * math.sin(math.pi * u)
            k = float(grasp.params.get("spring", GRASP_SPRING))
            c = float(grasp.params.get("damping", GRASP_DAMPING))
            wrench[:3] += k * (hand - probe.position) \
                + c * (hand_vel - probe_vel[:3])
        return wrench

    def push_wrench(self, t: float, probe: Pose, neck: Pose) -> np.ndarray:
        wrench = np.zeros(6)
        for event in self.events:
            if event.kind != "PushProbe" or not event.start <= t < event.end:
                continue
            force = _direction(event.params, "force", probe.position, neck)
            wrench[:3] += force * _bump(event.window(t))
        return wrench

    def body_state(self, t: float) -> tuple[float, float, np.ndarray]:
        """Doctor-body distance, side sign, and direct joint torques."""
        d_b = FAR_DISTANCE
        side = 1.0
        torque = np.zeros(self.n)
        for event in self.events:
            if event.kind not in ("BodyApproach", "BodyContact") \
                    or not event.start <= t < event.end:
                continue
            u = _bump(event.window(t))
            near = float(event.params.get(
                "min_distance", 0.12 if event.kind == "BodyApproach" else 0.05))
            d_evt = FAR_DISTANCE + (near - FAR_DISTANCE) * u
            if d_evt < d_b:
                d_b = d_evt
                side = _side_sign(event.params.get("side", "right"))
            if event.kind == "BodyContact":
                joint = int(event.params["joint"])
                if not 1 <= joint <= self.n:
                    raise ValueError(f"body contact joint {joint} out of range")
                torque[joint - 1] += float(event.params["torque"]) * u
        return d_b, side, torque

    def neck_displacement(self, t: float, neck_base: Pose) -> np.ndarray:
        """World-frame displacement of the neck; motion persists after the event."""
        disp = np.zeros(3)
        for event in self.events:
            if event.kind != "PatientMove" or t < event.start:
                continue
            vec = np.asarray(event.params["displacement"], dtype=float).reshape(3)
            if event.params.get("frame", "neck") == "neck":
                vec = quat_rotate(neck_base.quat, vec)
            disp += vec * _smooth(event.window(t))
        return disp
