"""Robot description, joint state, and pose types.

A robot is a serial chain of revolute joints. Link ``i`` attaches to link
``i-1`` through a fixed translation ``offset`` followed by a rotation of
``q[i]`` about the unit vector ``axis`` (both expressed in the parent frame).
Mass properties (``mass``, ``com``, ``inertia`` about the com) live in the
link frame. The flange frame is the last link frame shifted by ``ee_offset``.

Robot parameter files are JSON::

    {
      "name": "scan_arm",
      "gravity": [0, 0, -9.81],
      "ee_offset": [0, 0, 0.107],
      "links": [
        {"axis": [0,0,1], "offset": [0,0,0.333], "mass": 4.97,
         "com": [0,0.03,-0.09], "inertia": [[...],[...],[...]]},
        ...
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .rotations import quat_normalize, skew


@dataclass
class Pose:
    """Rigid-body pose: world position and unit quaternion (w, x, y, z)."""

    position: np.ndarray
    quat: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.quat = quat_normalize(np.asarray(self.quat, dtype=float).reshape(4))

    def copy(self) -> "Pose":
        return Pose(self.position.copy(), self.quat.copy())


@dataclass
class JointState:
    """Joint positions and velocities (rad, rad/s)."""

    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        self.qd = np.asarray(self.qd, dtype=float).reshape(-1)
        if self.q.shape != self.qd.shape:
            raise ValueError("q and qd must have the same length")

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def copy(self) -> "JointState":
        return JointState(self.q.copy(), self.qd.copy())


@dataclass
class RobotModel:
    """Serial-chain kinematic and inertial parameters.

    The scanning stack runs on a 7-joint arm; smaller chains are accepted so
    closed-form test fixtures (two-link, pendulum) can reuse the same code.
    """

    name: str
    axes: np.ndarray        # (n, 3) unit joint axes in parent frame
    offsets: np.ndarray     # (n, 3) joint origin in parent frame
    masses: np.ndarray      # (n,)
    coms: np.ndarray        # (n, 3) link com in link frame
    inertias: np.ndarray    # (n, 3, 3) about com, link frame
    gravity: np.ndarray     # (3,) acceleration, world frame
    ee_offset: np.ndarray   # (3,) flange offset in last link frame
    # reflected drive inertia per joint (kg m^2), added to the mass-matrix
    # diagonal; geared actuators dominate the apparent inertia of light links
    rotor_inertia: np.ndarray | None = None
    # precomputed per-joint skew(axis) and skew(axis)^2 for Rodrigues rotations
    _ax_skew: np.ndarray = field(init=False, repr=False)
    _ax_skew2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.axes = np.asarray(self.axes, dtype=float)
        self.offsets = np.asarray(self.offsets, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        self.coms = np.asarray(self.coms, dtype=float)
        self.inertias = np.asarray(self.inertias, dtype=float)
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)
        self.ee_offset = np.asarray(self.ee_offset, dtype=float).reshape(3)
        n = self.axes.shape[0]
        if n < 1:
            raise ValueError("robot needs at least one link")
        norms = np.linalg.norm(self.axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("joint axes must be unit vectors")
        self.axes = self.axes / norms[:, None]
        if np.any(self.masses <= 0.0):
            raise ValueError("link masses must be positive")
        for i, ine in enumerate(self.inertias):
            if not np.allclose(ine, ine.T, atol=1e-12):
                raise ValueError(f"inertia of link {i} is not symmetric")
            if np.any(np.linalg.eigvalsh(ine) <= 0.0):
                raise ValueError(f"inertia of link {i} is not positive definite")
        if self.rotor_inertia is None:
            self.rotor_inertia = np.zeros(n)
        else:
            self.rotor_inertia = np.asarray(self.rotor_inertia, dtype=float).reshape(n)
            if np.any(self.rotor_inertia < 0.0):
                raise ValueError("rotor inertia must be non-negative")
        self._ax_skew = np.stack([skew(a) for a in self.axes])
        self._ax_skew2 = np.einsum("nab,nbc->nac", self._ax_skew, self._ax_skew)

    @property
    def n(self) -> int:
        return self.axes.shape[0]


def _get(entry: dict, key: str, where: str):
    if key not in entry:
        raise ValueError(f"robot file missing field '{key}' in {where}")
    return entry[key]


def robot_from_dict(data: dict) -> RobotModel:
    links = _get(data, "links", "root")
    if not isinstance(links, list) or not links:
        raise ValueError("robot file field 'links' must be a non-empty list")
    axes, offsets, masses, coms, inertias = [], [], [], [], []
    for i, entry in enumerate(links):
        where = f"links[{i}]"
        axes.append(_get(entry, "axis", where))
        offsets.append(_get(entry, "offset", where))
        masses.append(_get(entry, "mass", where))
        coms.append(_get(entry, "com", where))
        inertias.append(_get(entry, "inertia", where))
    return RobotModel(
        name=data.get("name", "robot"),
        axes=np.array(axes, dtype=float),
        offsets=np.array(offsets, dtype=float),
        masses=np.array(masses, dtype=float),
        coms=np.array(coms, dtype=float),
        inertias=np.array(inertias, dtype=float),
        gravity=np.array(data.get("gravity", [0.0, 0.0, -9.81]), dtype=float),
        ee_offset=np.array(data.get("ee_offset", [0.0, 0.0, 0.0]), dtype=float),
        rotor_inertia=np.array(
            [entry.get("rotor_inertia", 0.0) for entry in links], dtype=float),
    )


def load_robot(path: str | Path) -> RobotModel:
    """Load and validate a robot parameter JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"robot file {path} is not valid JSON: {exc}") from exc
    return robot_from_dict(data)


def builtin_robot_path(name: str = "scan_arm") -> Path:
    """Path of a robot description shipped with the package."""
    return Path(str(resources.files("intentctl").joinpath(f"data/robots/{name}.json")))
