"""Self-contained property checks behind the `check` command.

Each check returns a named result instead of asserting, so the CLI can
print one line per property and exit nonzero if any fail. The test suite
carries stricter versions of the same properties; this module is the
fast, installable smoke screen.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .dynamics import evaluate_dynamics
from .hierarchy import SingularityError, decouple
from .model import JointState, builtin_robot_path, load_robot
from .scenario import build_world, parse_scenario
from .weighting import FactorParams, PerceptionSnapshot, basic_b, compute_factors


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _random_states(model, count: int, seed: int):
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        q = rng.uniform(-2.2, 2.2, model.n)
        qd = rng.uniform(-1.0, 1.0, model.n)
        sigma = np.linalg.svd(evaluate_dynamics(
            model, JointState(q, qd)).j1, compute_uv=False)
        if sigma[-1] / sigma[0] > 1e-3:
            states.append(JointState(q, qd))
    return states


def check_hierarchy_identities(model, count: int = 200,
                               seed: int = 0) -> CheckResult:
    """Null-space and inverse identities of the two-level decomposition."""
    worst = 0.0
    for state in _random_states(model, count, seed):
        try:
            d = decouple(model, state)
        except SingularityError:
            continue
        ev = evaluate_dynamics(model, state)
        n = model.n
        residues = [
            np.linalg.norm(d.j1 @ d.z2.T),
            np.linalg.norm(d.z1 @ ev.mass @ d.z2.T),
            np.linalg.norm(d.z1 @ d.jbar1.T - np.eye(6)),
            np.linalg.norm(d.z2 @ d.jbar2.T - np.eye(1)),
            np.linalg.norm(d.jbar @ d.jbar_inv - np.eye(n)),
            np.linalg.norm(d.lam[:6, 6:]) / max(np.linalg.norm(d.lam), 1.0),
        ]
        worst = max(worst, max(residues))
    passed = worst < 1e-8
    return CheckResult("hierarchy identities", passed,
                       f"worst residual {worst:.2e} over {count} states")


def check_coriolis_skew(model, count: int = 50, seed: int = 1) -> CheckResult:
    """dM/dt - 2C must be skew symmetric (energy-consistent C)."""
    worst = 0.0
    dt = 1e-6
    for state in _random_states(model, count, seed):
        ev = evaluate_dynamics(model, state)
        m_plus = evaluate_dynamics(
            model, JointState(state.q + dt * state.qd, state.qd)).mass
        mdot = (m_plus - ev.mass) / dt
        s = mdot - 2.0 * ev.coriolis
        worst = max(worst, float(np.max(np.abs(s + s.T))) /
                    max(float(np.max(np.abs(ev.mass))), 1.0))
    passed = worst < 1e-4      # finite-difference Mdot limits precision
    return CheckResult("coriolis skew symmetry", passed,
                       f"worst normalized residual {worst:.2e}")


def check_basic_function() -> CheckResult:
    grid = np.linspace(0.0, 50.0, 10001)
    values = np.array([basic_b(s) for s in grid])
    ok = (basic_b(0.0) == 1.0
          and basic_b(1.0) == 0.5
          and basic_b(-3.0) == 1.0
          and bool(np.all(np.diff(values) <= 0.0))
          and bool(np.all((values >= 0.0) & (values <= 1.0))))
    return CheckResult("basic weighting function", ok,
                       "b(0)=1, b(1)=0.5, monotone on [0,50]")


def check_factor_ranges(seed: int = 2, count: int = 500) -> CheckResult:
    rng = np.random.default_rng(seed)
    params = FactorParams()
    j1 = rng.standard_normal((6, 7))
    ok = True
    for _ in range(count):
        snap = PerceptionSnapshot(
            d_h=float(rng.uniform(0.0, 2.0)),
            d_b=float(rng.uniform(0.0, 2.0)),
            d_p=rng.uniform(-0.5, 0.5, 3),
            f_z_E=float(rng.uniform(-40.0, 40.0)),
            tau_e=rng.uniform(-5.0, 5.0, 7),
            F_1e=rng.uniform(-20.0, 20.0, 6))
        f = compute_factors(snap, params, j1)
        for v in (f.a_h, f.a_p, f.a_f, f.a_n, f.a_b):
            ok = ok and 0.0 <= v <= 1.0
    return CheckResult("factor ranges", ok,
                       f"all five factors in [0,1] over {count} draws")


def check_closed_loop(duration: float = 0.5) -> CheckResult:
    """Zero-power damping and posture-torque transparency while running."""
    scenario = parse_scenario({
        "schema": 1, "duration_s": duration,
        "trajectory": {"n": 9, "total_time": 10.0},
    })
    world = build_world(scenario)
    world.state.qd[:] = 0.1
    world.run(duration)
    zp = max(d.zero_power_ratio for d in world.diagnostics)
    tr = max(d.transparency_ratio for d in world.diagnostics)
    passed = zp < 1e-10 and tr < 1e-9
    return CheckResult("closed-loop invariants", passed,
                       f"zero-power {zp:.2e}, transparency {tr:.2e}")


def run_all(robot_ref: str = "scan_arm") -> list[CheckResult]:
    model = load_robot(builtin_robot_path(robot_ref))
    return [
        check_hierarchy_identities(model),
        check_coriolis_skew(model),
        check_basic_function(),
        check_factor_ranges(),
        check_closed_loop(),
    ]
