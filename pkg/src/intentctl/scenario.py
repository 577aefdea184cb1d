"""Scenario files: validated JSON in, normalized JSON out, worlds built.

A scenario is the single configuration artifact for a run. The loader
rejects unknown fields by name, fills every default, and produces a
canonical dict whose JSON dump round-trips byte for byte. World assembly
(robot, neck placement, scan sweep, events) lives here too so headless
runs and the realtime server share one builder.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .contact import NeckModel
from .dynamics import evaluate_dynamics
from .events import EventTimeline, HumanEvent
from .model import JointState, Pose, builtin_robot_path, load_robot
from .rotations import quat_conjugate, quat_multiply, quat_normalize, quat_rotate
from .simulation import SimWorld
from .supervisor import ModeSupervisor, Thresholds, TrajectoryBuffer
from .weighting import FactorParams

SCHEMA_VERSION = 1

K1G_DEFAULT = [500.0, 500.0, 500.0, 20.0, 20.0, 20.0]
Q_START_DEFAULT = [0.0, -0.6, 0.0, 1.2, 0.0, 0.9, 0.0]

# every permitted key with its default; None marks "no default, optional"
_TOP_KEYS = {
    "schema": SCHEMA_VERSION,
    "robot": "scan_arm",
    "duration_s": None,
    "dt": 1e-3,
    "seed": 0,
    "initial_q": Q_START_DEFAULT,
    "compensate_external": False,
    "gains": {},
    "factors": {},
    "thresholds": {},
    "supervisor": {},
    "neck": {},
    "trajectory": None,
    "events": [],
}

_GAIN_KEYS = {"k1g": K1G_DEFAULT, "k2g": 10.0}
_FACTOR_KEYS = {"r_h": 0.10, "r_b": 0.25, "r_p": 0.08, "x_top": 0.06,
                "x_bottom": -0.06, "f_0": 15.0, "tau_0": 3.0}
_THRESHOLD_KEYS = {"a_ht": 0.5, "a_pt": 0.5, "a_ft": 0.05, "a_bt": 0.5,
                   "a_nt": 0.5, "eps": 0.03}
_SUPERVISOR_KEYS = {"delta": 0.002, "delta_ret": 0.001}
_NECK_KEYS = {"position": None, "quat": None, "radius": 0.05, "x_top": 0.06,
              "x_bottom": -0.06, "k_c": 2000.0, "c_c": 50.0,
              "clearance": 0.015}
_TRAJECTORY_KEYS = {"n": None, "total_time": None, "inward_offset": 0.005,
                    "sweep": 0.04, "available_at": 0.0}
_EVENT_KEYS = ("kind", "start", "end", "params")

_EVENT_PARAM_KEYS = {
    "GraspProbe": {"approach_s", "drag", "magnitude", "near_distance"},
    "ReleaseProbe": set(),
    "PushProbe": {"force", "magnitude"},
    "BodyApproach": {"side", "min_distance"},
    "BodyContact": {"joint", "torque", "side", "min_distance"},
    "PatientMove": {"displacement", "frame"},
}


def builtin_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package."""
    return Path(str(resources.files("intentctl").joinpath(
        f"data/scenarios/{name}.json")))


def _check_keys(block: dict, allowed, where: str) -> None:
    for key in block:
        if key not in allowed:
            raise ValueError(f"unknown field '{where}{key}'")


def _merge(block: dict, defaults: dict, where: str) -> dict:
    _check_keys(block, defaults, where)
    out = {}
    for key, default in defaults.items():
        if key in block:
            out[key] = block[key]
        elif default is not None:
            out[key] = default
    return out


def _as_floats(value, n: int, where: str) -> list[float]:
    try:
        vec = [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"field '{where}' must be a number list") from exc
    if len(vec) != n:
        raise ValueError(f"field '{where}' must have length {n}")
    return vec


@dataclass(frozen=True)
class Scenario:
    """A validated, fully defaulted scenario configuration."""

    data: dict

    def dump(self) -> str:
        """Canonical JSON form; loading it back reproduces it exactly."""
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    @property
    def duration(self) -> float:
        return self.data["duration_s"]

    @property
    def dt(self) -> float:
        return self.data["dt"]

    @property
    def events(self) -> list[HumanEvent]:
        return [HumanEvent(e["kind"], e["start"], e["end"],
                           dict(e["params"])) for e in self.data["events"]]


def parse_scenario(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ValueError("scenario must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "")

    if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema version {raw['schema']!r}; "
            f"this build reads schema {SCHEMA_VERSION}")
    if "duration_s" not in raw:
        raise ValueError("field 'duration_s' is required")

    data: dict = {"schema": SCHEMA_VERSION}
    data["robot"] = str(raw.get("robot", _TOP_KEYS["robot"]))
    data["duration_s"] = float(raw["duration_s"])
    if data["duration_s"] <= 0.0:
        raise ValueError("duration_s must be positive")
    data["dt"] = float(raw.get("dt", _TOP_KEYS["dt"]))
    if not 0.0 < data["dt"] <= 0.005:
        raise ValueError("dt must be in (0, 0.005] s")
    data["seed"] = int(raw.get("seed", 0))
    data["initial_q"] = [float(v) for v in
                         raw.get("initial_q", Q_START_DEFAULT)]
    data["compensate_external"] = bool(
        raw.get("compensate_external", False))

    gains = _merge(raw.get("gains", {}), _GAIN_KEYS, "gains.")
    gains["k1g"] = _as_floats(gains["k1g"], 6, "gains.k1g")
    gains["k2g"] = float(gains["k2g"])
    data["gains"] = gains

    factors = _merge(raw.get("factors", {}), _FACTOR_KEYS, "factors.")
    factors = {k: float(v) for k, v in factors.items()}
    FactorParams(**factors)          # runs the range checks
    data["factors"] = factors

    thresholds = _merge(raw.get("thresholds", {}), _THRESHOLD_KEYS,
                        "thresholds.")
    thresholds = {k: float(v) for k, v in thresholds.items()}
    Thresholds(**thresholds)
    data["thresholds"] = thresholds

    sup = _merge(raw.get("supervisor", {}), _SUPERVISOR_KEYS, "supervisor.")
    sup = {k: float(v) for k, v in sup.items()}
    if sup["delta"] <= 0.0 or sup["delta_ret"] <= 0.0:
        raise ValueError("supervisor rates must be positive")
    data["supervisor"] = sup

    neck = _merge(raw.get("neck", {}), _NECK_KEYS, "neck.")
    if "position" in neck:
        neck["position"] = _as_floats(neck["position"], 3, "neck.position")
        neck["quat"] = _as_floats(neck.get("quat", [1.0, 0.0, 0.0, 0.0]), 4,
                                  "neck.quat")
    elif "quat" in neck:
        raise ValueError("neck.quat has no effect without neck.position")
    for key in ("radius", "x_top", "x_bottom", "k_c", "c_c", "clearance"):
        neck[key] = float(neck[key])
    data["neck"] = neck

    traj = raw.get("trajectory")
    if traj is not None:
        traj = _merge(traj, _TRAJECTORY_KEYS, "trajectory.")
        for key in ("n", "total_time"):
            if key not in traj:
                raise ValueError(f"field 'trajectory.{key}' is required")
        traj["n"] = int(traj["n"])
        for key in ("total_time", "inward_offset", "sweep", "available_at"):
            traj[key] = float(traj[key])
        if traj["n"] < 2:
            raise ValueError("trajectory.n must be at least 2")
        if traj["total_time"] <= 0.0:
            raise ValueError("trajectory.total_time must be positive")
        if traj["sweep"] / (traj["n"] - 1) > 0.005:
            raise ValueError(
                "trajectory points would jump more than 5 mm; "
                "raise n or shrink sweep")
    data["trajectory"] = traj

    events = raw.get("events", [])
    norm_events = []
    last_start = -math.inf
    last_end = 0.0
    for i, entry in enumerate(events):
        _check_keys(entry, _EVENT_KEYS, f"events[{i}].")
        try:
            kind = entry["kind"]
            params = dict(entry.get("params", {}))
            if kind in _EVENT_PARAM_KEYS:
                _check_keys(params, _EVENT_PARAM_KEYS[kind],
                            f"events[{i}].params.")
            event = HumanEvent(kind, float(entry["start"]),
                               float(entry["end"]), params)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"event {i}: {exc}") from exc
        if event.start < last_start:
            raise ValueError(
                f"events must be sorted by start time; event {i} begins "
                f"before event {i - 1}")
        last_start = event.start
        last_end = max(last_end, event.end)
        norm_events.append({"kind": event.kind, "start": event.start,
                            "end": event.end, "params": params})
    if norm_events and data["duration_s"] < last_end:
        raise ValueError(
            "duration_s must cover the last event end "
            f"({last_end:g} s)")
    data["events"] = norm_events

    return Scenario(json.loads(json.dumps(data)))


def load_scenario(path: str | Path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"scenario {path} is not valid JSON: {exc}") from exc
    try:
        return parse_scenario(raw)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def resolve_robot(ref: str):
    """A robot reference is either a builtin name or a file path."""
    path = Path(ref)
    if not path.suffix:
        path = builtin_robot_path(ref)
    return load_robot(path)


def resolve_scenario(ref: str | Path) -> Scenario:
    """A scenario reference is either a builtin name or a file path."""
    path = Path(ref)
    if not path.suffix:
        builtin = builtin_scenario_path(str(ref))
        if not builtin.exists():
            raise ValueError(
                f"no builtin scenario named {ref!r} (and no such file)")
        path = builtin
    return load_scenario(path)


def _neck_pose_from_probe(probe: Pose, standoff: float) -> Pose:
    """Place the cylinder under the probe face.

    The axis runs perpendicular to the probe z axis, `standoff` below the
    probe along -z, so the probe's z is the outward surface normal and a
    push reads as positive f_z_E.
    """
    rot = np.array([quat_rotate(probe.quat, e) for e in np.eye(3)]).T
    z_hat = rot[:, 2]
    x_probe = rot[:, 0]
    axis = x_probe - np.dot(x_probe, z_hat) * z_hat
    norm = np.linalg.norm(axis)
    if norm < 1e-9:
        raise ValueError("probe x axis is parallel to its z axis")
    axis = axis / norm
    y_hat = np.cross(z_hat, axis)
    rot_neck = np.column_stack([axis, y_hat, z_hat])
    center = probe.position - standoff * z_hat
    return Pose(center, _quat_from_matrix(rot_neck))


def _quat_from_matrix(rot: np.ndarray) -> np.ndarray:
    # w-first quaternion from a proper rotation matrix
    t = np.trace(rot)
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (rot[2, 1] - rot[1, 2]) / s,
                      (rot[0, 2] - rot[2, 0]) / s,
                      (rot[1, 0] - rot[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(rot)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(rot[i, i] - rot[j, j] - rot[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (rot[k, j] - rot[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (rot[j, i] + rot[i, j]) / s
        q[1 + k] = (rot[k, i] + rot[i, k]) / s
    return quat_normalize(q)


def _build_trajectory(cfg: dict, neck_pose: Pose, probe: Pose,
                      q0: float) -> TrajectoryBuffer:
    """An axial scan sweep just inside the surface, z pointing outward."""
    n = cfg["n"]
    rel = quat_rotate(quat_conjugate(neck_pose.quat),
                      probe.position - neck_pose.position)
    height = cfg["radius"] - cfg["inward_offset"]
    positions = np.zeros((n, 3))
    positions[:, 0] = rel[0] + np.linspace(-0.5, 0.5, n) * cfg["sweep"]
    positions[:, 2] = height
    rel_quat = quat_multiply(quat_conjugate(neck_pose.quat), probe.quat)
    quats = np.tile(rel_quat, (n, 1))
    x2d = np.full(n, q0)
    return TrajectoryBuffer(positions, quats, x2d, cfg["total_time"])


def build_world(scenario: Scenario) -> SimWorld:
    """Assemble the closed-loop world a scenario describes."""
    data = scenario.data
    model = resolve_robot(data["robot"])
    q0 = np.asarray(data["initial_q"], dtype=float)
    if q0.shape != (model.n,):
        raise ValueError(
            f"initial_q has {q0.size} entries; robot has {model.n} joints")
    state = JointState(q0, np.zeros(model.n))
    probe = evaluate_dynamics(model, state).pose

    ncfg = data["neck"]
    if "position" in ncfg:
        neck_pose = Pose(np.asarray(ncfg["position"], float),
                         np.asarray(ncfg["quat"], float))
    else:
        neck_pose = _neck_pose_from_probe(
            probe, ncfg["radius"] + ncfg["clearance"])
    neck = NeckModel(pose=neck_pose, radius=ncfg["radius"],
                     x_top=ncfg["x_top"], x_bottom=ncfg["x_bottom"],
                     k_c=ncfg["k_c"], c_c=ncfg["c_c"])

    trajectory = None
    available_at = 0.0
    tcfg = data["trajectory"]
    if tcfg is not None:
        cfg = dict(tcfg)
        cfg["radius"] = ncfg["radius"]
        trajectory = _build_trajectory(cfg, neck_pose, probe,
                                       float(q0[0]))
        available_at = tcfg["available_at"]

    sup_cfg = data["supervisor"]
    supervisor = ModeSupervisor(
        thresholds=Thresholds(**data["thresholds"]),
        dt=data["dt"], delta=sup_cfg["delta"],
        delta_ret=sup_cfg["delta_ret"])

    return SimWorld(
        model=model,
        initial_state=state,
        neck=neck,
        timeline=EventTimeline(scenario.events, model.n),
        supervisor=supervisor,
        factor_params=FactorParams(**data["factors"]),
        k1g=np.asarray(data["gains"]["k1g"], float),
        k2g=data["gains"]["k2g"],
        trajectory=trajectory,
        trajectory_available_at=available_at,
        compensate_external=data["compensate_external"],
        dt=data["dt"],
    )
