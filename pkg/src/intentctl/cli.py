"""Command line entry point: run, serve, check."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .runner import format_summary, run_headless
from .scenario import resolve_scenario


def _configure_logging() -> None:
    level_name = os.environ.get("INTENTCTL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        print(f"warning: INTENTCTL_LOG={level_name!r} is not a log level; "
              "using WARNING", file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(
        level=level, force=True,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intentctl",
        description="Interaction-aware scanning control, simulated end to "
                    "end. Set INTENTCTL_LOG=INFO or DEBUG for verbosity.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario headless")
    run_p.add_argument("scenario",
                       help="scenario JSON file or builtin name")
    run_p.add_argument("--out", metavar="trace.csv",
                       help="write telemetry CSV here")
    run_p.add_argument("--summary", action="store_true",
                       help="print occupancy/force/error figures")

    serve_p = sub.add_parser("serve", help="serve a scenario in real time")
    serve_p.add_argument("scenario",
                         help="scenario JSON file or builtin name")
    serve_p.add_argument("--port", type=int, required=True,
                         help="TCP port for newline-delimited JSON")
    serve_p.add_argument("--speed", type=float, default=1.0,
                         help="sim seconds per wall second (default 1.0)")

    sub.add_parser("check", help="run the algebraic property suite")
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        try:
            scenario = resolve_scenario(args.scenario)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        status, summary = run_headless(scenario, out_path=args.out)
        if args.summary or "error" in summary:
            print(format_summary(summary))
        if args.out:
            print(f"telemetry written to {args.out}")
        return status

    if args.command == "serve":
        try:
            scenario = resolve_scenario(args.scenario)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        from .server import RealtimeServer
        if args.speed <= 0.0:
            print("error: --speed must be positive", file=sys.stderr)
            return 2
        server = RealtimeServer(scenario, port=args.port, speed=args.speed)
        print(f"serving on port {server.port} "
              f"(speed {args.speed:g}x, duration {scenario.duration:g} s)")
        try:
            server.run()
        except KeyboardInterrupt:
            pass
        finally:
            server.close()
        return 0

    if args.command == "check":
        from .checks import run_all
        results = run_all()
        failed = 0
        for result in results:
            tag = "PASS" if result.passed else "FAIL"
            print(f"[{tag}] {result.name}: {result.detail}")
            failed += 0 if result.passed else 1
        if failed:
            print(f"{failed} of {len(results)} checks failed",
                  file=sys.stderr)
            return 1
        print(f"all {len(results)} checks passed")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
