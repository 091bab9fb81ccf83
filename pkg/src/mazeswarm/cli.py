"""Command line front end.

Exit codes: 0 success, 1 configuration/input error, 2 simulation fault.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys

from dataclasses import replace

from .engine import AGENT_KINDS, SimulationFault
from .experiment import ConfigError, emit_report, load_config, run_sweep
from .maze import MalformedMaze, maze_from_maz_bytes, parse_maze, serialize_maze

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAULT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mazeswarm",
        description="Multi-robot maze exploration simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the sweep described by a config file")
    sim.add_argument("--config", required=True, help="path to a key = value config file")
    sim.add_argument("--out", default="results", help="output directory for CSVs")
    sim.add_argument("--seeds", default=None,
                     help="comma-separated seed override, e.g. 1,2,3")
    sim.add_argument("--agent", default=None, choices=AGENT_KINDS,
                     help="run only this agent kind")
    sim.add_argument("--jobs", type=int, default=1,
                     help="worker processes (results identical for any value)")

    conv = sub.add_parser("convert-maze", help="convert a maze file to the ASCII format")
    conv.add_argument("input", help="binary micromouse dump or ASCII maze")
    conv.add_argument("output", help="destination ASCII maze path")

    sub.add_parser("verify", help="run the acceptance test suite")
    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.seeds is not None:
        try:
            seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
        except ValueError:
            raise ConfigError("--seeds", f"expected comma-separated integers, got {args.seeds!r}")
        if not seeds:
            raise ConfigError("--seeds", "need at least one seed")
        cfg = replace(cfg, seeds=seeds)
    if args.agent is not None:
        cfg = replace(cfg, agents=(args.agent,))
    if not cfg.maze_paths:
        raise ConfigError("mazes", "config lists no mazes to run")
    if args.jobs < 1:
        raise ConfigError("--jobs", f"must be >= 1, got {args.jobs}")

    report = run_sweep(cfg, jobs=args.jobs)
    written = emit_report(report, args.out)
    print(f"{len(report.runs)} runs -> {args.out}")
    for path in written:
        print(f"  {os.path.basename(path)}")
    return EXIT_OK


def _cmd_convert(args: argparse.Namespace) -> int:
    with open(args.input, "rb") as fh:
        blob = fh.read()
    try:
        maze = parse_maze(blob.decode("ascii"))
    except (UnicodeDecodeError, MalformedMaze):
        try:
            maze = maze_from_maz_bytes(blob)
        except ValueError as exc:
            print(f"error: {args.input}: not a recognizable maze: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    with open(args.output, "w", encoding="ascii") as fh:
        fh.write(serialize_maze(maze))
    print(f"{args.input} -> {args.output} ({maze.width}x{maze.height})")
    return EXIT_OK


def _cmd_verify() -> int:
    suite = os.path.join("tests", "test_acceptance.py")
    if not os.path.exists(suite):
        print(f"error: {suite} not found; run from the repository root", file=sys.stderr)
        return EXIT_CONFIG
    proc = subprocess.run([sys.executable, "-m", "pytest", suite, "-v"])
    return EXIT_OK if proc.returncode == 0 else EXIT_FAULT


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "convert-maze":
            return _cmd_convert(args)
        return _cmd_verify()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MalformedMaze as exc:
        print(f"maze error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationFault as exc:
        print(f"simulation fault: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
