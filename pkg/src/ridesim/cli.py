"""Operator command line.

Subcommands: run a live session, replay a log (optionally verifying it
against itself), run a scripted trace, synthesize a centerline trace,
generate/plot courses, and export the latency report. stdout carries one
machine-readable JSON summary per invocation; diagnostics go to stderr.

Exit codes: 0 success, 1 divergence or incomplete verification, 2 config
error, 3 bind failure, 4 missing/corrupt log or trace, 5 version mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config, scenario, trace, wire
from .errors import (BindFailure, ConfigError, CorruptLog, RideSimError,
                     UnknownRoute, VersionMismatch)
from .server import run_session
from .telemetry import replay as telemetry_replay

EXIT_OK = 0
EXIT_DIVERGENT = 1
EXIT_CONFIG = 2
EXIT_BIND = 3
EXIT_BADLOG = 4
EXIT_VERSION = 5


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True), flush=True)


def _engine_config(args: argparse.Namespace) -> config.EngineConfig:
    overrides: dict = {}
    if getattr(args, "vehicle", None) is not None:
        if args.vehicle not in wire.VEHICLES:
            raise ConfigError(
                f"unknown vehicle {args.vehicle!r}; valid: {', '.join(wire.VEHICLES)}")
        overrides["vehicle"] = args.vehicle
    for flag, key in (("route", "route"), ("tick_rate", "tick_rate"),
                      ("spacing", "spacing")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    cfg = config.load_config(getattr(args, "config", None), overrides)
    calib = getattr(args, "calibration", None)
    if calib is not None:
        from .calibration import load_profiles
        cfg.profiles = load_profiles(calib)
        cfg.validate()
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    summary = run_session(cfg, listen=args.listen, log_path=args.log,
                          max_ticks=args.max_ticks, realtime=True)
    _emit(summary)
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    expected = None
    if args.config or args.calibration:
        expected = _engine_config(args)
    result = telemetry_replay(args.logfile, expected_config=expected,
                              verify=args.verify)
    out = {"ticks": result.n_ticks}
    if args.verify:
        out["verdict"] = "identical" if result.identical else "divergent"
        if not result.identical:
            out["divergence_tick"] = result.divergence_tick
    _emit(out)
    if args.verify and not result.identical:
        print(f"replay divergent at tick {result.divergence_tick}", file=sys.stderr)
        return EXIT_DIVERGENT
    return EXIT_OK


def cmd_script(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    pairs = trace.load_trace(args.tracefile)
    summary = trace.run_script(cfg, pairs, max_ticks=args.max_ticks,
                               log_path=args.log)
    _emit(summary)
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    vehicle = args.vehicle or cfg.vehicle
    if not vehicle:
        raise ConfigError("trace generation needs --vehicle")
    if args.offcourse:
        pairs = trace.make_offcourse_trace(cfg, vehicle)
    else:
        pairs = trace.make_centerline_trace(cfg, vehicle)
    trace.save_trace(pairs, args.out)
    _emit({"trace": str(args.out), "vehicle": vehicle,
           "messages": len(pairs), "ticks": pairs[-1][0] + 1 if pairs else 0})
    return EXIT_OK


def cmd_course(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    course, coins = cfg.build_course()
    obj = scenario.course_to_dict(course, coins)
    out = {"route": cfg.route, "length": course.total_length, "coins": coins.total}
    if args.out:
        Path(args.out).write_text(json.dumps(obj) + "\n")
        out["file"] = str(args.out)
    if args.plot:
        from . import report  # matplotlib import stays off the hot paths
        report.plot_course(course, coins, args.plot,
                           title=scenario.ROUTE_NAMES.get(cfg.route, "course"))
        out["figure"] = str(args.plot)
    if not args.out and not args.plot:
        print(json.dumps(obj))
        return EXIT_OK
    _emit(out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from . import report
    summary = report.latency_report(args.logfile, args.out_dir)
    _emit(summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ridesim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, listen: bool = False) -> None:
        p.add_argument("--vehicle", help="active vehicle "
                       f"({', '.join(wire.VEHICLES)})")
        p.add_argument("--route", type=int, help="built-in route id 1-4")
        p.add_argument("--config", help="session config file (JSON)")
        p.add_argument("--calibration", help="rider calibration file (JSON)")
        p.add_argument("--tick-rate", dest="tick_rate", type=float,
                       help="simulation rate in Hz")
        p.add_argument("--spacing", type=float, help="coin spacing in meters")
        p.add_argument("--max-ticks", dest="max_ticks", type=int,
                       help="stop after this many ticks")
        p.add_argument("--log", help="write the session log here")
        if listen:
            p.add_argument("--listen", default=config.DEFAULT_LISTEN,
                           help="host:port to serve (port 0 picks one)")

    p_run = sub.add_parser("run", help="serve a live session")
    common(p_run, listen=True)
    p_run.set_defaults(fn=cmd_run)

    p_replay = sub.add_parser("replay", help="deterministically re-run a log")
    p_replay.add_argument("logfile")
    p_replay.add_argument("--verify", action="store_true",
                          help="compare against the log's own state records")
    p_replay.add_argument("--config", help="refuse unless the log used this config")
    p_replay.add_argument("--calibration")
    p_replay.set_defaults(fn=cmd_replay)

    p_script = sub.add_parser("script", help="run a scripted trace, unpaced")
    p_script.add_argument("tracefile")
    common(p_script)
    p_script.set_defaults(fn=cmd_script)

    p_trace = sub.add_parser("trace", help="synthesize a rider trace")
    common(p_trace)
    p_trace.add_argument("--out", required=True, help="trace file to write")
    p_trace.add_argument("--offcourse", action="store_true",
                         help="trace that leaves the corridor instead")
    p_trace.set_defaults(fn=cmd_trace)

    p_course = sub.add_parser("course", help="export or plot a course")
    common(p_course)
    p_course.add_argument("--out", help="course file to write")
    p_course.add_argument("--plot", help="render the course to this image")
    p_course.set_defaults(fn=cmd_course)

    p_report = sub.add_parser("report", help="export the latency report")
    p_report.add_argument("logfile")
    p_report.add_argument("--out-dir", dest="out_dir", default="reports",
                          help="directory for latency.csv and latency_hist.png")
    p_report.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, UnknownRoute) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BindFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BIND
    except VersionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except CorruptLog as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BADLOG
    except RideSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
