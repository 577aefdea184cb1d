"""Interaction weighting factors derived from perception and force data.

Five scalar weights in [0, 1] summarize what the people around the robot
are doing: a_h hand proximity to the probe, a_b doctor body proximity to
the robot body, a_p probe proximity to the patient's neck region, a_f
probe contact force, a_n unexplained (null-space) external torque. All
five come from one smooth basic function, so scheduled gains inherit its
continuity and never switch hard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def basic_b(s: float) -> float:
    """Smooth saturation: 1 for s < 0, then 1/(1+s^6).

    Stays near 1 for s well below 1, crosses 0.5 exactly at s = 1, and
    decays with a sextic tail. Factors are built so that s is a distance
    or load divided by its scaling constant.
    """
    if s < 0.0:
        return 1.0
    return 1.0 / (1.0 + s**6)


def null_space_torque(tau_e: np.ndarray, j1: np.ndarray, f_1e: np.ndarray) -> np.ndarray:
    """External joint torque not explained by the end-effector wrench."""
    return np.asarray(tau_e, dtype=float) - np.asarray(j1).T @ np.asarray(f_1e, dtype=float)


@dataclass(frozen=True)
class FactorParams:
    """Scaling constants for the weighting factors.

    r_h, r_b, r_p are radii (m) at which the corresponding proximity factor
    crosses 0.5; x_top and x_bottom bound the neck cylinder axially in the
    neck frame (m); f_0 (N) and tau_0 (N m) are the half-activation force
    and null-space torque.
    """

    r_h: float = 0.10
    r_b: float = 0.25
    r_p: float = 0.08
    x_top: float = 0.06
    x_bottom: float = -0.06
    f_0: float = 15.0
    tau_0: float = 3.0

    def __post_init__(self):
        for name in ("r_h", "r_b", "r_p", "f_0", "tau_0"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"factor parameter {name} must be positive")
        if not self.x_top > self.x_bottom:
            raise ValueError("x_top must exceed x_bottom")


@dataclass(frozen=True)
class PerceptionSnapshot:
    """Ground-truth perception inputs for one control cycle.

    d_h: probe-to-hand distance (m). d_b: closest doctor-body-to-robot-body
    distance (m). d_p: probe position expressed in the neck frame (m).
    f_z_E: contact force along the end-effector z axis (N). tau_e: external
    joint torque (N m, 7). F_1e: external end-effector wrench (6).
    """

    d_h: float
    d_b: float
    d_p: np.ndarray
    f_z_E: float
    tau_e: np.ndarray
    F_1e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d_p", np.asarray(self.d_p, dtype=float))
        object.__setattr__(self, "tau_e", np.asarray(self.tau_e, dtype=float))
        object.__setattr__(self, "F_1e", np.asarray(self.F_1e, dtype=float))
        if self.d_h < 0.0 or self.d_b < 0.0:
            raise ValueError("distances must be non-negative")
        values = [self.d_h, self.d_b, self.f_z_E]
        if not (np.isfinite(values).all() and np.isfinite(self.d_p).all()
                and np.isfinite(self.tau_e).all() and np.isfinite(self.F_1e).all()):
            raise ValueError("perception snapshot contains non-finite values")


@dataclass(frozen=True)
class Factors:
    a_h: float
    a_p: float
    a_f: float
    a_n: float
    a_b: float

    def as_dict(self) -> dict:
        return {"a_h": self.a_h, "a_p": self.a_p, "a_f": self.a_f,
                "a_n": self.a_n, "a_b": self.a_b}


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def compute_factors(snap: PerceptionSnapshot, params: FactorParams,
                    j1: np.ndarray) -> Factors:
    """Evaluate all five weighting factors for one cycle.

    The neck region is a cylinder whose axis is the neck-frame x axis:
    a_p multiplies a radial term by an axial one so it peaks when the probe
    sits on the axis between x_bottom and x_top. a_f and a_n invert the
    basic function because they measure activation, not proximity; pulling
    forces (f_z_E < 0) leave a_f at zero through the negative branch.
    """
    a_h = basic_b(snap.d_h / params.r_h)
    a_b = basic_b(snap.d_b / params.r_b)

    radial = math.hypot(snap.d_p[1], snap.d_p[2])
    mid = 0.5 * (params.x_top + params.x_bottom)
    half = 0.5 * (params.x_top - params.x_bottom)
    a_p = basic_b(radial / params.r_p) * basic_b(abs(snap.d_p[0] - mid) / half)

    a_f = 1.0 - basic_b(snap.f_z_E / params.f_0)

    tau_n = null_space_torque(snap.tau_e, j1, snap.F_1e)
    a_n = 1.0 - basic_b(float(np.linalg.norm(tau_n)) / params.tau_0)

    return Factors(a_h=_clamp01(a_h), a_p=_clamp01(a_p), a_f=_clamp01(a_f),
                   a_n=_clamp01(a_n), a_b=_clamp01(a_b))
