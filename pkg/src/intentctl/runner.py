"""Headless scenario execution and run summaries."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np

from .scenario import Scenario, build_world
from .simulation import SimWorld, write_telemetry_csv


def summarize(world: SimWorld) -> dict:
    """Occupancy, force, and error figures for a finished run."""
    records = world.telemetry
    if not records:
        return {"steps": 0, "mode_occupancy": {}, "max_force_n": 0.0,
                "max_error_m": 0.0}
    modes = Counter(r.mode for r in records)
    total = len(records)
    occupancy = {mode: 100.0 * count / total
                 for mode, count in sorted(modes.items())}
    max_force = max(r.f_z_E for r in records)
    max_error = max(float(np.linalg.norm(r.err[:3])) for r in records)
    return {
        "steps": total,
        "duration_s": records[-1].time_s + world.dt,
        "mode_occupancy": occupancy,
        "max_force_n": max_force,
        "max_error_m": max_error,
    }


def run_headless(scenario: Scenario, out_path: str | Path | None = None,
                 world: SimWorld | None = None) -> tuple[int, dict]:
    """Run a scenario to completion; returns (exit status, summary).

    Telemetry gathered before a non-finite blowup is still written, so a
    failing run leaves evidence behind.
    """
    if world is None:
        world = build_world(scenario)
    status = 0
    error = None
    try:
        world.run(scenario.duration)
    except (RuntimeError, ValueError) as exc:
        status = 1
        error = str(exc)
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            write_telemetry_csv(world.telemetry, fh)
    summary = summarize(world)
    if error is not None:
        summary["error"] = error
    return status, summary


def format_summary(summary: dict) -> str:
    lines = [f"steps: {summary['steps']}"]
    if "duration_s" in summary:
        lines.append(f"simulated: {summary['duration_s']:.3f} s")
    occ = summary.get("mode_occupancy", {})
    if occ:
        lines.append("mode occupancy:")
        for mode, pct in occ.items():
            lines.append(f"  {mode:>13s}  {pct:6.2f} %")
    lines.append(f"max f_z_E: {summary.get('max_force_n', 0.0):.3f} N")
    lines.append(f"max translational error: "
                 f"{summary.get('max_error_m', 0.0) * 1000.0:.3f} mm")
    if "error" in summary:
        lines.append(f"ABORTED: {summary['error']}")
    return "\n".join(lines)
