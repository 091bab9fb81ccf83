"""Experiment configuration, sweep execution and report emission.

A sweep runs the cross product mazes x agents x seeds x sweep values and
aggregates medians/means per (agent, sweep value) group.  Sweep points
are independent missions, so they can run across processes; aggregation
order never depends on worker count, keeping outputs byte-identical.
"""

from __future__ import annotations

import csv
import glob
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import IO, Sequence

from .engine import (AGENT_KINDS, AGENT_PROPOSED, DEFAULT_MAX_TICKS,
                     DEFAULT_PRETRAIN_EPISODES, MissionResult, SimulationFault,
                     run_mission)
from .maze import Maze, load_maze
from .net import NetConfig
from .qlearn import RLParams

SWEEPABLE = ("range_px", "loss_prob")


class ConfigError(ValueError):
    """A config key is unknown, unparsable, or out of domain."""

    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    maze_paths: tuple[str, ...] = ()
    agents: tuple[str, ...] = (AGENT_PROPOSED,)
    robots: int = 4
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    net: NetConfig = field(default_factory=NetConfig)
    rl: RLParams = field(default_factory=RLParams)
    pretrain_episodes: int = DEFAULT_PRETRAIN_EPISODES
    max_ticks: int = DEFAULT_MAX_TICKS
    messaging: bool = True
    coverage_target_pct: float = 99.0
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()


_NET_KEYS = {f.name for f in fields(NetConfig)}
_RL_KEYS = {f.name for f in fields(RLParams)}


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw!r}") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(key, f"expected true/false, got {raw!r}")


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Parse flat `key = value` lines; '#' starts a comment.

    Maze paths may be globs and resolve relative to base_dir; every other
    value is a scalar or comma-separated list.  Unknown keys are errors.
    """
    values: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in values:
            raise ConfigError(key, "duplicate key")
        values[key] = raw

    cfg = ExperimentConfig()
    net = cfg.net
    rl = cfg.rl
    updates: dict[str, object] = {}

    for key, raw in values.items():
        if key == "mazes":
            paths: list[str] = []
            for pattern in _split_list(raw):
                resolved = pattern if os.path.isabs(pattern) else os.path.join(base_dir, pattern)
                if any(ch in pattern for ch in "*?["):
                    matches = sorted(glob.glob(resolved))
                    if not matches:
                        raise ConfigError(key, f"glob {pattern!r} matched nothing")
                    paths.extend(os.path.abspath(m) for m in matches)
                else:
                    paths.append(os.path.abspath(resolved))
            updates["maze_paths"] = tuple(paths)
        elif key == "agents":
            agents = tuple(_split_list(raw))
            for agent in agents:
                if agent not in AGENT_KINDS:
                    raise ConfigError(key, f"unknown agent kind {agent!r}")
            if not agents:
                raise ConfigError(key, "need at least one agent")
            updates["agents"] = agents
        elif key == "robots":
            robots = _parse_int(key, raw)
            if robots not in (1, 2, 4):
                raise ConfigError(key, f"robot count must be 1, 2 or 4, got {robots}")
            updates["robots"] = robots
        elif key == "seeds":
            seeds = tuple(_parse_int(key, s) for s in _split_list(raw))
            if not seeds:
                raise ConfigError(key, "need at least one seed")
            updates["seeds"] = seeds
        elif key in _NET_KEYS:
            net = replace(net, **{key: _parse_float(key, raw)})
        elif key in _RL_KEYS:
            rl = replace(rl, **{key: _parse_float(key, raw)})
        elif key == "pretrain_episodes":
            updates["pretrain_episodes"] = _parse_int(key, raw)
        elif key == "max_ticks":
            updates["max_ticks"] = _parse_int(key, raw)
        elif key == "messaging":
            updates["messaging"] = _parse_bool(key, raw)
        elif key == "coverage_target_pct":
            updates["coverage_target_pct"] = _parse_float(key, raw)
        elif key == "sweep_param":
            if raw not in SWEEPABLE:
                raise ConfigError(key, f"must be one of {SWEEPABLE}, got {raw!r}")
            updates["sweep_param"] = raw
        elif key == "sweep_values":
            updates["sweep_values"] = tuple(_parse_float(key, v) for v in _split_list(raw))
        else:
            raise ConfigError(key, "unknown key")

    cfg = replace(cfg, net=net, rl=rl, **updates)
    _validate(cfg)
    return cfg


def _split_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _validate(cfg: ExperimentConfig) -> None:
    if not 0.0 <= cfg.net.loss_prob <= 1.0:
        raise ConfigError("loss_prob", f"must be in [0, 1], got {cfg.net.loss_prob}")
    if cfg.net.range_px < 0:
        raise ConfigError("range_px", f"must be >= 0, got {cfg.net.range_px}")
    if not 0.0 < cfg.rl.learning_rate <= 1.0:
        raise ConfigError("learning_rate", f"must be in (0, 1], got {cfg.rl.learning_rate}")
    if not 0.0 <= cfg.rl.discount < 1.0:
        raise ConfigError("discount", f"must be in [0, 1), got {cfg.rl.discount}")
    if not 0.0 <= cfg.rl.explore_rate <= 1.0:
        raise ConfigError("explore_rate", f"must be in [0, 1], got {cfg.rl.explore_rate}")
    if cfg.max_ticks < 0:
        raise ConfigError("max_ticks", f"must be >= 0, got {cfg.max_ticks}")
    if cfg.pretrain_episodes < 0:
        raise ConfigError("pretrain_episodes", f"must be >= 0, got {cfg.pretrain_episodes}")
    if (cfg.sweep_param is None) != (not cfg.sweep_values):
        raise ConfigError("sweep_values", "sweep_param and sweep_values go together")
    if cfg.sweep_param == "loss_prob":
        for v in cfg.sweep_values:
            if not 0.0 <= v <= 1.0:
                raise ConfigError("sweep_values", f"loss_prob value {v} not in [0, 1]")
    if cfg.sweep_param == "range_px":
        for v in cfg.sweep_values:
            if v < 0:
                raise ConfigError("sweep_values", f"range_px value {v} must be >= 0")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = [
        "mazes = " + ", ".join(cfg.maze_paths),
        "agents = " + ", ".join(cfg.agents),
        f"robots = {cfg.robots}",
        "seeds = " + ", ".join(str(s) for s in cfg.seeds),
    ]
    for f in fields(NetConfig):
        lines.append(f"{f.name} = {getattr(cfg.net, f.name)!r}")
    for f in fields(RLParams):
        lines.append(f"{f.name} = {getattr(cfg.rl, f.name)!r}")
    lines.append(f"pretrain_episodes = {cfg.pretrain_episodes}")
    lines.append(f"max_ticks = {cfg.max_ticks}")
    lines.append(f"messaging = {str(cfg.messaging).lower()}")
    lines.append(f"coverage_target_pct = {cfg.coverage_target_pct!r}")
    if cfg.sweep_param is not None:
        lines.append(f"sweep_param = {cfg.sweep_param}")
        lines.append("sweep_values = " + ", ".join(repr(v) for v in cfg.sweep_values))
    return "\n".join(lines) + "\n"


# --- sweep execution --------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    """One mission to execute, fully self-describing and picklable."""

    maze_path: str
    agent: str
    seed: int
    sweep_value: float | None
    robots: int
    net: NetConfig
    rl: RLParams
    pretrain_episodes: int
    max_ticks: int
    messaging: bool
    coverage_target_pct: float


@dataclass
class RunRecord:
    """Aggregatable outcome of one mission."""

    maze: str
    agent: str
    sweep_value: float | None
    seed: int
    ticks: int
    ticks_to_33: int | None
    ticks_to_66: int | None
    ticks_to_99: int | None
    final_coverage_pct: float
    final_overlap_pct: float
    bytes_sent: int
    collisions: int
    termination: str
    coverage_curve: list[float]
    overlap_curve: list[float]


@dataclass
class SweepReport:
    config: ExperimentConfig
    runs: list[RunRecord]

    def group(self, agent: str, sweep_value: float | None) -> list[RunRecord]:
        return [r for r in self.runs
                if r.agent == agent and r.sweep_value == sweep_value]


_MAZE_CACHE: dict[str, Maze] = {}


def _cached_maze(path: str) -> Maze:
    maze = _MAZE_CACHE.get(path)
    if maze is None:
        maze = load_maze(path)
        _MAZE_CACHE[path] = maze
    return maze


def execute_run(spec: RunSpec) -> RunRecord:
    """Run one mission and distill it into a RunRecord."""
    maze = _cached_maze(spec.maze_path)
    try:
        result = run_mission(
            maze, spec.agent, spec.seed, robots=spec.robots, net_cfg=spec.net,
            params=spec.rl, max_ticks=spec.max_ticks,
            pretrain_episodes=spec.pretrain_episodes, messaging=spec.messaging,
            coverage_target_pct=spec.coverage_target_pct)
    except SimulationFault as exc:
        raise SimulationFault(
            f"{os.path.basename(spec.maze_path)} agent={spec.agent} "
            f"seed={spec.seed} sweep={spec.sweep_value}: {exc}") from exc
    return _to_record(spec, result)


def _to_record(spec: RunSpec, result: MissionResult) -> RunRecord:
    final = result.final
    return RunRecord(
        maze=os.path.basename(spec.maze_path), agent=spec.agent,
        sweep_value=spec.sweep_value, seed=spec.seed, ticks=final.tick,
        ticks_to_33=result.ticks_to(33.0), ticks_to_66=result.ticks_to(66.0),
        ticks_to_99=result.ticks_to(99.0),
        final_coverage_pct=final.coverage_pct,
        final_overlap_pct=final.overlap_pct,
        bytes_sent=final.bytes, collisions=final.collisions,
        termination=result.termination,
        coverage_curve=[row.coverage_pct for row in result.rows],
        overlap_curve=[row.overlap_pct for row in result.rows])


def enumerate_specs(cfg: ExperimentConfig) -> list[RunSpec]:
    """Cross product in stable order: sweep value, agent, maze, seed."""
    sweep_points: list[float | None]
    if cfg.sweep_param is None:
        sweep_points = [None]
    else:
        sweep_points = list(cfg.sweep_values)
    specs = []
    for value in sweep_points:
        net = cfg.net if value is None else replace(cfg.net, **{cfg.sweep_param: value})
        for agent in cfg.agents:
            for maze_path in cfg.maze_paths:
                for seed in cfg.seeds:
                    specs.append(RunSpec(
                        maze_path=maze_path, agent=agent, seed=seed,
                        sweep_value=value, robots=cfg.robots, net=net, rl=cfg.rl,
                        pretrain_episodes=cfg.pretrain_episodes,
                        max_ticks=cfg.max_ticks, messaging=cfg.messaging,
                        coverage_target_pct=cfg.coverage_target_pct))
    return specs


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> SweepReport:
    """Execute every run in the config's cross product.

    jobs > 1 fans runs out to worker processes; results are collected in
    spec order either way, so the report is identical for any job count.
    """
    specs = enumerate_specs(cfg)
    if jobs <= 1:
        runs = [execute_run(spec) for spec in specs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(execute_run, specs, chunksize=1))
    return SweepReport(config=cfg, runs=runs)


# --- report emission ---------------------------------------------------------

def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _median(values: Sequence[float]) -> float | None:
    return statistics.median(values) if values else None


def _mean(values: Sequence[float]) -> float | None:
    return statistics.fmean(values) if values else None


def _groups(report: SweepReport) -> list[tuple[str, float | None, list[RunRecord]]]:
    cfg = report.config
    sweep_points: list[float | None] = (
        [None] if cfg.sweep_param is None else list(cfg.sweep_values))
    out = []
    for value in sweep_points:
        for agent in cfg.agents:
            out.append((agent, value, report.group(agent, value)))
    return out


def emit_report(report: SweepReport, out_dir: str) -> list[str]:
    """Write the full CSV bundle into out_dir; returns the paths written.

    Files: runs.csv (one row per mission), time_per_coverage.csv,
    coverage_vs_iter.csv, overlap_vs_iter.csv, range_sweep.csv,
    loss_sweep.csv.  Sweep files for a parameter that was not swept are
    headers only.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def emit(name: str, header: list[str], rows: list[list[object]]) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        written.append(path)

    emit("runs.csv",
         ["maze", "agent", "sweep_value", "seed", "ticks", "ticks_to_33",
          "ticks_to_66", "ticks_to_99", "final_coverage_pct",
          "final_overlap_pct", "bytes_sent", "collisions", "termination"],
         [[r.maze, r.agent, r.sweep_value, r.seed, r.ticks, r.ticks_to_33,
           r.ticks_to_66, r.ticks_to_99, r.final_coverage_pct,
           r.final_overlap_pct, r.bytes_sent, r.collisions, r.termination]
          for r in report.runs])

    rows: list[list[object]] = []
    for agent, value, group in _groups(report):
        if not group:
            continue
        for threshold, picker in ((33, lambda r: r.ticks_to_33),
                                  (66, lambda r: r.ticks_to_66),
                                  (99, lambda r: r.ticks_to_99)):
            reached = [picker(r) for r in group if picker(r) is not None]
            rows.append([agent, value, threshold, _median(reached),
                         _mean(reached), len(reached), len(group)])
    emit("time_per_coverage.csv",
         ["agent", "sweep_value", "threshold_pct", "median_ticks",
          "mean_ticks", "runs_reached", "runs_total"], rows)

    for name, curve_of in (("coverage_vs_iter.csv", lambda r: r.coverage_curve),
                           ("overlap_vs_iter.csv", lambda r: r.overlap_curve)):
        rows = []
        for agent, value, group in _groups(report):
            if not group:
                continue
            curves = [curve_of(r) for r in group]
            horizon = max(len(c) for c in curves)
            for t in range(horizon):
                # Curves of finished runs hold their last value: the run is
                # over, its coverage no longer changes.
                at_t = [c[t] if t < len(c) else c[-1] for c in curves]
                rows.append([agent, value, t, _median(at_t), _mean(at_t)])
        emit(name, ["agent", "sweep_value", "tick",
                    "median_" + name.split("_")[0] + "_pct",
                    "mean_" + name.split("_")[0] + "_pct"], rows)

    for name, param in (("range_sweep.csv", "range_px"),
                        ("loss_sweep.csv", "loss_prob")):
        rows = []
        if report.config.sweep_param == param:
            for agent, value, group in _groups(report):
                if not group:
                    continue
                t99 = [r.ticks_to_99 for r in group if r.ticks_to_99 is not None]
                cov = [r.final_coverage_pct for r in group]
                over = [r.final_overlap_pct for r in group]
                byt = [float(r.bytes_sent) for r in group]
                rows.append([agent, value, _median(t99), _mean(t99),
                             _median(cov), _mean(cov), _median(over),
                             _mean(over), _median(byt)])
        emit(name,
             ["agent", param, "median_ticks_to_99", "mean_ticks_to_99",
              "median_final_coverage_pct", "mean_final_coverage_pct",
              "median_final_overlap_pct", "mean_final_overlap_pct",
              "median_bytes_sent"], rows)

    return written
