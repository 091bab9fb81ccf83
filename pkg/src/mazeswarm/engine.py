"""Synchronous multi-robot tick engine.

Each tick runs fixed phases for every robot: sense, broadcast, merge,
choose, resolve collisions, move, learn, record metrics.  All randomness
comes from named streams derived from the mission seed, so a mission is a
pure function of (maze, agent kind, configuration, seed).
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import IO, Sequence

from .agents import (DfsDecision, DfsState, MemoryGreedyState, StackUnderflow,
                     dfs_apply, dfs_step, memory_greedy_apply, memory_greedy_step)
from .mapping import LocalMap
from .maze import Action, Cell, Maze, corner_cells, decompose, reachable_cells
from .net import LinkStats, NetConfig, NetMessage, broadcast_round
from .qlearn import (QTable, RewardInputs, RLParams, build_qcop, goal_distance,
                     merge_remote, pretrain_submaze, q_update, reward,
                     select_action)

AGENT_PROPOSED = "proposed"
AGENT_DFS = "dfs"
AGENT_MEMORY_GREEDY = "memory_greedy"
AGENT_KINDS = (AGENT_PROPOSED, AGENT_DFS, AGENT_MEMORY_GREEDY)

DEFAULT_MAX_TICKS = 2000
DEFAULT_PRETRAIN_EPISODES = 1
COVERAGE_TARGET_PCT = 99.0

Move = tuple[Action, Cell]


class SimulationFault(RuntimeError):
    """An internal invariant broke mid-run; the simulation is not trustworthy."""


def derive_rng(seed: int, *tags: object) -> random.Random:
    """Named random stream: stable across processes and platforms.

    String seeding hashes the text, so streams never depend on interpreter
    hash randomization or spawn order.
    """
    label = f"{seed}|" + "|".join(str(t) for t in tags)
    return random.Random(label)


@dataclass
class RobotState:
    id: int
    kind: str
    pos: Cell
    visited: set[Cell]
    local_map: LocalMap
    q: QTable
    rng: random.Random
    d_prev: int = 1
    moves: int = 0
    done: bool = False
    dfs: DfsState | None = None
    mg: MemoryGreedyState | None = None


@dataclass(frozen=True)
class MetricsRow:
    tick: int
    coverage_pct: float
    overlap_pct: float
    collisions: int
    sent: int
    delivered: int
    dropped: int
    bytes: int
    score: float


@dataclass
class WorldState:
    maze: Maze
    robots: list[RobotState]
    params: RLParams
    net: NetConfig
    messaging: bool
    net_rng: random.Random
    stats: LinkStats = field(default_factory=LinkStats)
    tick_count: int = 0
    collisions: int = 0
    global_explored: set[Cell] = field(default_factory=set)
    multi_visited: set[Cell] = field(default_factory=set)
    first_visitor: dict[Cell, int] = field(default_factory=dict)
    coverage_cells: int = 0
    rows: list[MetricsRow] = field(default_factory=list)


def build_world(maze: Maze, agent_kind: str, seed: int, *, robots: int = 4,
                net_cfg: NetConfig | None = None, params: RLParams | None = None,
                messaging: bool = True, initial_q: QTable | None = None) -> WorldState:
    """Place robots at the maze corners and initialize every random stream.

    initial_q, when given, is copied into each robot (the cooperative
    table produced by regional pretraining).
    """
    if agent_kind not in AGENT_KINDS:
        raise ValueError(f"unknown agent kind {agent_kind!r}")
    net_cfg = net_cfg if net_cfg is not None else NetConfig()
    params = params if params is not None else RLParams()
    starts = corner_cells(maze, robots)
    if len(set(starts)) != len(starts):
        raise ValueError("maze too small for this many robots: start corners collide")

    robot_states = []
    for i, start in enumerate(starts):
        robot = RobotState(
            id=i, kind=agent_kind, pos=start, visited={start},
            local_map=LocalMap(maze.width, maze.height),
            q=initial_q.copy() if initial_q is not None else QTable(),
            rng=derive_rng(seed, "robot", i))
        if agent_kind == AGENT_DFS:
            robot.dfs = DfsState.at(start)
        elif agent_kind == AGENT_MEMORY_GREEDY:
            robot.mg = MemoryGreedyState.at(start)
            robot.mg.explore_rate = params.explore_rate
        robot_states.append(robot)

    world = WorldState(maze=maze, robots=robot_states, params=params, net=net_cfg,
                       messaging=messaging, net_rng=derive_rng(seed, "net"))
    covered: set[Cell] = set()
    for start in starts:
        covered |= reachable_cells(maze, start)
    world.coverage_cells = len(covered)
    for robot in robot_states:
        _track_visit(world, robot, robot.pos)
    _append_metrics(world)
    return world


def _track_visit(world: WorldState, robot: RobotState, cell: Cell) -> None:
    robot.visited.add(cell)
    world.global_explored.add(cell)
    owner = world.first_visitor.setdefault(cell, robot.id)
    if owner != robot.id:
        world.multi_visited.add(cell)


def coverage_pct(world: WorldState) -> float:
    return 100.0 * len(world.global_explored) / world.coverage_cells


def overlap_pct(world: WorldState) -> float:
    return 100.0 * len(world.multi_visited) / max(1, len(world.global_explored))


def _append_metrics(world: WorldState) -> None:
    stats = world.stats
    cov = coverage_pct(world)
    total_moves = sum(r.moves for r in world.robots)
    score = cov / 100.0 - world.params.comm_cost_weight * (
        total_moves / max(1, len(world.global_explored)))
    world.rows.append(MetricsRow(
        tick=world.tick_count, coverage_pct=cov, overlap_pct=overlap_pct(world),
        collisions=world.collisions, sent=stats.sent, delivered=stats.delivered,
        dropped=stats.dropped, bytes=stats.bytes_sent, score=score))


def sense(world: WorldState, robot: RobotState) -> LocalMap:
    """Reveal the true walls of the robot's cell on its local map.

    Re-sensing a fully known cell changes nothing.
    """
    local_map = robot.local_map
    pos = robot.pos
    if local_map.known_mask.get(pos, 0) != 15:
        local_map.observe(pos, world.maze.wall_mask(pos))
    elif pos not in local_map.explored:
        local_map.explored.add(pos)
    return local_map


def resolve_collisions(positions: Sequence[Cell],
                       candidates: Sequence[Sequence[Move]]
                       ) -> tuple[list[tuple[Action | None, Cell]], list[bool]]:
    """Grant at most one robot per cell, deterministically.

    candidates[i] ranks robot i's moves best first; staying put is always
    the implicit last resort.  Rules, applied to a fixed point:

    - two robots may not swap cells; both are held in place instead
    - a robot keeping its own cell owns it; movers aiming there lose
    - among movers contesting a cell, the lowest id wins
    - a loser falls to its next candidate not already denied to it

    Returns the final (action, target) per robot (action None means stay)
    and a flag per robot marking whether its first choice was denied.
    """
    n = len(positions)
    ranked: list[list[tuple[Action | None, Cell]]] = []
    for i in range(n):
        row: list[tuple[Action | None, Cell]] = [
            (a, t) for a, t in candidates[i] if t != positions[i]]
        row.append((None, positions[i]))
        ranked.append(row)
    idx = [0] * n
    banned: list[set[Cell]] = [set() for _ in range(n)]

    def advance(i: int) -> None:
        stay = len(ranked[i]) - 1
        idx[i] += 1
        while idx[i] < stay and ranked[i][idx[i]][1] in banned[i]:
            idx[i] += 1

    cap = sum(len(row) for row in ranked) + n + 2
    for _ in range(cap):
        changed = False
        targets = [ranked[i][idx[i]][1] for i in range(n)]
        for i in range(n):
            if targets[i] == positions[i]:
                continue
            for j in range(i + 1, n):
                if targets[j] == positions[j]:
                    continue
                if targets[i] == positions[j] and targets[j] == positions[i]:
                    # Head-on swap: neither side yields, both hold.
                    idx[i] = len(ranked[i]) - 1
                    idx[j] = len(ranked[j]) - 1
                    changed = True
        targets = [ranked[i][idx[i]][1] for i in range(n)]
        claims: dict[Cell, list[int]] = {}
        for i in range(n):
            claims.setdefault(targets[i], []).append(i)
        for cell, claimants in claims.items():
            if len(claimants) == 1:
                continue
            winner = claimants[0]
            for i in claimants:
                if cell == positions[i]:
                    winner = i
                    break
            for i in claimants:
                if i != winner:
                    banned[i].add(cell)
                    advance(i)
                    changed = True
        if not changed:
            final = [ranked[i][idx[i]] for i in range(n)]
            if len({move[1] for move in final}) != n:
                raise SimulationFault("collision resolution granted a shared cell")
            return final, [idx[i] != 0 for i in range(n)]
    raise SimulationFault("collision resolution did not converge")


def _choose(world: WorldState, robot: RobotState) -> tuple[Sequence[Move], DfsDecision | None]:
    """Ranked move candidates for one robot, agent dispatch."""
    moves = world.maze.open_moves[robot.pos]
    if not moves or robot.done:
        return (), None
    if robot.kind == AGENT_DFS:
        try:
            decision = dfs_step(robot.dfs, moves)
        except StackUnderflow:
            robot.done = True
            return (), None
        return decision.candidates, decision
    if robot.kind == AGENT_MEMORY_GREEDY:
        return memory_greedy_step(robot.mg, robot.q, robot.pos, moves, robot.rng), None
    legal = [a for a, _ in moves]
    chosen = select_action(robot.q, robot.pos, legal, world.params, robot.rng)
    row = robot.q.row(robot.pos)
    first = next(m for m in moves if m[0] == chosen)
    rest = sorted((m for m in moves if m[0] != chosen), key=lambda m: -row[m[0]])
    return (first, *rest), None


def tick(world: WorldState) -> None:
    """Advance the world by one synchronous step and append a metrics row."""
    robots = world.robots
    params = world.params

    for robot in robots:
        sense(world, robot)

    if world.messaging:
        positions = [r.pos for r in robots]
        messages = [NetMessage(r.id, world.tick_count, r.pos, r.q.row(r.pos), True)
                    for r in robots]
        inboxes = broadcast_round(positions, messages, world.net, world.net_rng,
                                  world.stats, world.maze.cell_pitch_px)
        for robot, inbox in zip(robots, inboxes):
            for msg in inbox:
                if robot.kind == AGENT_DFS:
                    robot.dfs.shared_explored.add(msg.pos)
                else:
                    merge_remote(robot.q, msg.pos, msg.qvals, msg.pos in robot.visited)
                if msg.mark:
                    robot.local_map.mark_explored(msg.pos)

    all_candidates: list[Sequence[Move]] = []
    dfs_decisions: list[DfsDecision | None] = []
    for robot in robots:
        cands, decision = _choose(world, robot)
        all_candidates.append(cands)
        dfs_decisions.append(decision)

    final, denied = resolve_collisions([r.pos for r in robots], all_candidates)
    world.collisions += sum(denied)

    for robot, cands, decision, (action, target) in zip(robots, all_candidates,
                                                        dfs_decisions, final):
        prev = robot.pos
        moved = target != prev
        looped = target in robot.visited
        if moved:
            robot.pos = target
            robot.moves += 1
            _track_visit(world, robot, target)
            # Reveal the arrived cell now so the learning step below sees
            # the same map state pretraining would (sense-on-arrival).
            sense(world, robot)

        if robot.kind == AGENT_DFS:
            if decision is not None:
                dfs_apply(robot.dfs, decision, robot.pos)
            continue

        if moved:
            if robot.mg is not None:
                memory_greedy_apply(robot.mg, robot.pos)
            update_action = action
        elif cands:
            # Intent denied: learn from the blocked primary choice.
            update_action = cands[0][0]
        else:
            continue
        d_curr = goal_distance(robot.local_map, robot.pos)
        r = reward(RewardInputs(robot.d_prev, d_curr, looped), params)
        next_legal = [mv for mv, _ in world.maze.open_moves[robot.pos]]
        q_update(robot.q, prev, update_action, r, robot.pos, params,
                 next_actions=next_legal)
        robot.d_prev = d_curr

    world.tick_count += 1
    _append_metrics(world)


@dataclass
class MissionResult:
    agent: str
    seed: int
    rows: list[MetricsRow]
    termination: str
    world: WorldState

    def ticks_to(self, threshold_pct: float) -> int | None:
        for row in self.rows:
            if row.coverage_pct >= threshold_pct:
                return row.tick
        return None

    @property
    def final(self) -> MetricsRow:
        return self.rows[-1]


_QCOP_CACHE: dict[tuple, QTable] = {}


def pretrained_qcop(maze: Maze, robots: int, params: RLParams,
                    episodes: int) -> QTable:
    """Regional pretraining for every robot, stitched into one table.

    Robot i trains alone in region i (regions follow the corner order), so
    the combined table is defined on disjoint entries by construction.
    Pretraining is deterministic per (maze, region): phase 1 happens once
    per maze, not once per mission seed, so repeated missions reuse the
    memoized table.  Callers copy before mutating.
    """
    key = (maze.key(), robots, params, episodes)
    cached = _QCOP_CACHE.get(key)
    if cached is not None:
        return cached
    submazes = decompose(maze, robots)
    tables = []
    for i, sub in enumerate(submazes):
        rng = random.Random(f"pretrain|{hash(maze.key())}|{i}")
        tables.append(pretrain_submaze(sub, params, episodes, rng))
    qcop = build_qcop(tables, submazes)
    _QCOP_CACHE[key] = qcop
    return qcop


def run_mission(maze: Maze, agent_kind: str, seed: int, *, robots: int = 4,
                net_cfg: NetConfig | None = None, params: RLParams | None = None,
                max_ticks: int = DEFAULT_MAX_TICKS,
                pretrain_episodes: int = DEFAULT_PRETRAIN_EPISODES,
                messaging: bool = True,
                coverage_target_pct: float = COVERAGE_TARGET_PCT) -> MissionResult:
    """Run one mission to the coverage target or the tick budget.

    The proposed agent first pretrains per region (skipped when
    pretrain_episodes is 0) and starts the mission with the combined
    table; baselines start cold.
    """
    params = params if params is not None else RLParams()
    initial_q = None
    if agent_kind == AGENT_PROPOSED and pretrain_episodes > 0:
        initial_q = pretrained_qcop(maze, robots, params, pretrain_episodes)
    world = build_world(maze, agent_kind, seed, robots=robots, net_cfg=net_cfg,
                        params=params, messaging=messaging, initial_q=initial_q)
    termination = "max_ticks"
    while world.tick_count < max_ticks:
        if coverage_pct(world) >= coverage_target_pct:
            termination = "coverage"
            break
        tick(world)
    else:
        if coverage_pct(world) >= coverage_target_pct:
            termination = "coverage"
    return MissionResult(agent=agent_kind, seed=seed, rows=world.rows,
                         termination=termination, world=world)


def write_metrics_csv(rows: Sequence[MetricsRow], fh: IO[str]) -> None:
    writer = csv.writer(fh)
    writer.writerow(["tick", "coverage_pct", "overlap_pct", "collisions",
                     "sent", "delivered", "dropped", "bytes", "score"])
    for row in rows:
        writer.writerow([row.tick, repr(row.coverage_pct), repr(row.overlap_pct),
                         row.collisions, row.sent, row.delivered, row.dropped,
                         row.bytes, repr(row.score)])
