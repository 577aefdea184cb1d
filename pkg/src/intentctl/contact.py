"""Penalty contact with a cylindrical neck phantom, plus torque bookkeeping.

The patient's neck is a finite cylinder. The probe tip is a point; when it
penetrates the lateral surface a spring-damper force pushes it back out
along the cylinder normal. Contact is unilateral: the surface can only
push, never pull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Pose
from .rotations import quat_conjugate, quat_rotate


@dataclass
class NeckModel:
    """Cylinder pose and contact parameters.

    The cylinder axis runs along the local x direction between x_bottom and
    x_top. The pose is re-written every cycle while a patient-motion event
    is active.
    """

    pose: Pose
    radius: float
    x_top: float = 0.06
    x_bottom: float = -0.06
    k_c: float = 2000.0
    c_c: float = 50.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("neck radius must be positive")
        if self.k_c < 0.0 or self.c_c < 0.0:
            raise ValueError("contact stiffness and damping must be non-negative")
        if not self.x_top > self.x_bottom:
            raise ValueError("x_top must exceed x_bottom")


def probe_contact_wrench(probe: Pose, probe_vel: np.ndarray,
                         neck: NeckModel) -> tuple[np.ndarray, float]:
    """Contact wrench on the probe and its normal component.

    Returns the world-frame wrench (pure force, zero torque) and the z
    component of that force expressed in the probe frame, which is what
    the axial force channel of the probe would measure.
    """
    probe_vel = np.asarray(probe_vel, dtype=float).reshape(6)
    rel = quat_rotate(quat_conjugate(neck.pose.quat),
                      probe.position - neck.pose.position)
    wrench = np.zeros(6)
    if not neck.x_bottom <= rel[0] <= neck.x_top:
        return wrench, 0.0
    dist = math.hypot(rel[1], rel[2])
    if dist >= neck.radius or dist < 1e-12:
        return wrench, 0.0

    depth = neck.radius - dist
    normal_local = np.array([0.0, rel[1] / dist, rel[2] / dist])
    normal = quat_rotate(neck.pose.quat, normal_local)
    separation_rate = float(normal @ probe_vel[:3])
    force = neck.k_c * depth + neck.c_c * max(0.0, -separation_rate)
    force = max(0.0, force)  # unilateral: the surface never pulls
    wrench[:3] = force * normal
    f_z = float(quat_rotate(quat_conjugate(probe.quat), wrench[:3])[2])
    return wrench, f_z


def external_torque(j1: np.ndarray, ee_wrench: np.ndarray,
                    body_torque: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total external joint torque and the wrench a wrist sensor would see.

    Body contact acts directly on the joints and deliberately does not
    appear in the returned wrench: the difference between the two outputs
    is exactly the unexplained null-space torque the weighting logic looks
    for.
    """
    f_1e = np.asarray(ee_wrench, dtype=float).reshape(6)
    tau_e = j1.T @ f_1e + np.asarray(body_torque, dtype=float).reshape(-1)
    return tau_e, f_1e
