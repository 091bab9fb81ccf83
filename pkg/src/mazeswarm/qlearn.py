"""Tabular Q-learning: table storage, updates, rewards, action selection.

The learned table maps (cell, action) to a value.  Robots keep one table
each; regional pretraining produces per-region tables that are later
stitched into a single cooperative table.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .mapping import LocalMap
from .maze import ACTIONS, Action, Cell, SubMaze, action_between

ZERO_ROW = (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class RLParams:
    """Learning and reward parameters.

    learning_rate/discount/explore_rate drive the update and the
    epsilon-greedy policy.  progress_gain scales reward for moving toward
    the nearest frontier, distance_gain scales the standing term that grows
    with frontier distance, and loop_penalty is added when a move re-enters
    an already-visited cell.  comm_cost_weight prices mobility in the
    mission score.
    """

    learning_rate: float = 0.5
    discount: float = 0.9
    explore_rate: float = 0.1
    progress_gain: float = 1.0
    distance_gain: float = 0.5
    loop_penalty: float = -1.0
    comm_cost_weight: float = 0.01


class NoLegalAction(RuntimeError):
    """Action selection was asked to choose from an empty legal set."""


class OverlapError(ValueError):
    """Two regional tables claim the same (cell, action) entry."""


class QTable:
    """Q values, defined-entry flags and visit counts, keyed by cell.

    Rows are dense float lists of length 4 (one slot per action); a
    per-cell bitmask records which of the four entries are defined, so
    `entry_count` reflects (cell, action) granularity rather than cells.
    Undefined entries read as 0.0.
    """

    __slots__ = ("_values", "_defined", "_visits")

    def __init__(self):
        self._values: dict[Cell, list[float]] = {}
        self._defined: dict[Cell, int] = {}
        self._visits: dict[Cell, list[int]] = {}

    def get(self, cell: Cell, action: Action) -> float:
        row = self._values.get(cell)
        return row[action] if row is not None else 0.0

    def row(self, cell: Cell) -> tuple[float, float, float, float]:
        row = self._values.get(cell)
        return tuple(row) if row is not None else ZERO_ROW

    def visit_count(self, cell: Cell, action: Action) -> int:
        row = self._visits.get(cell)
        return row[action] if row is not None else 0

    def visit_row(self, cell: Cell) -> tuple[int, int, int, int]:
        row = self._visits.get(cell)
        return tuple(row) if row is not None else (0, 0, 0, 0)

    def defined_mask(self, cell: Cell) -> int:
        return self._defined.get(cell, 0)

    def set_entry(self, cell: Cell, action: Action, value: float,
                  visits: int = 0) -> None:
        values = self._values.setdefault(cell, [0.0, 0.0, 0.0, 0.0])
        values[action] = value
        self._defined[cell] = self._defined.get(cell, 0) | (1 << action)
        vrow = self._visits.setdefault(cell, [0, 0, 0, 0])
        vrow[action] = visits

    def entry_count(self) -> int:
        return sum(bin(mask).count("1") for mask in self._defined.values())

    def cells(self) -> Iterable[Cell]:
        return self._values.keys()

    def copy(self) -> "QTable":
        dup = QTable()
        dup._values = {cell: list(row) for cell, row in self._values.items()}
        dup._defined = dict(self._defined)
        dup._visits = {cell: list(row) for cell, row in self._visits.items()}
        return dup

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        return (self._values == other._values and self._defined == other._defined
                and self._visits == other._visits)


def q_update(q: QTable, s: Cell, a: Action, reward_value: float, s_next: Cell,
             params: RLParams,
             next_actions: Sequence[Action] | None = None) -> QTable:
    """One tabular update toward reward plus discounted best next value.

    new = (1 - lr) * old + lr * (reward + discount * max_a' Q(s_next, a')).
    next_actions is the action set available at s_next; in a walled grid
    that is the legal moves there, and leaving it as None means all four.
    Restricting the max matters: entries for moves that cannot be taken
    never leave 0.0 and would otherwise mask every learned value below
    zero.  Mutates q in place, bumps the (s, a) visit count, and returns q.
    """
    alpha = params.learning_rate
    old = q.get(s, a)
    next_row = q._values.get(s_next)
    if next_row is None:
        best_next = 0.0
    elif next_actions is None:
        best_next = max(next_row)
    else:
        best_next = max((next_row[na] for na in next_actions), default=0.0)
    value = (1.0 - alpha) * old + alpha * (reward_value + params.discount * best_next)
    q.set_entry(s, a, value, q.visit_count(s, a) + 1)
    return q


@dataclass(frozen=True)
class RewardInputs:
    """Frontier distances before and after a move, and loop detection.

    Distances are clamped >= 1 by the map layer, so reciprocals are safe.
    looped is true when the move re-entered a cell the robot had already
    visited (including being held in place).
    """

    d_prev: float
    d_curr: float
    looped: bool


def reward(inputs: RewardInputs, params: RLParams) -> float:
    """Progress toward the frontier, a distance-dependent standing term,
    and a penalty for looping.

    progress_gain * (1/d_curr - 1/d_prev) + distance_gain * (1 - 1/d_curr)
    plus loop_penalty when looped.
    """
    r = (params.progress_gain * (1.0 / inputs.d_curr - 1.0 / inputs.d_prev)
         + params.distance_gain * (1.0 - 1.0 / inputs.d_curr))
    if inputs.looped:
        r += params.loop_penalty
    return r


def goal_distance(local_map: LocalMap, pos: Cell) -> int:
    """Steps from pos to the nearest exploration target on the local map.

    Clamped >= 1; a fully explored map also yields 1.
    """
    return local_map.frontier_distance(pos)


def select_action(q: QTable, s: Cell, legal: Sequence[Action], params: RLParams,
                  rng: random.Random) -> Action:
    """Epsilon-greedy over the legal actions.

    With probability explore_rate pick uniformly from legal; otherwise the
    highest-valued legal action, first in N, E, S, W order on ties.
    """
    if not legal:
        raise NoLegalAction(f"no legal action at {s}")
    ordered = sorted(legal)
    if rng.random() < params.explore_rate:
        return ordered[rng.randrange(len(ordered))]
    row = q._values.get(s)
    if row is None:
        return ordered[0]
    best = ordered[0]
    best_value = row[best]
    for a in ordered[1:]:
        if row[a] > best_value:
            best = a
            best_value = row[a]
    return best


def merge_remote(q: QTable, s_remote: Cell, q_remote: Sequence[float],
                 visited_locally: bool) -> QTable:
    """Adopt a heard Q row for a cell this robot has no opinion about.

    First-hand knowledge wins: the row is installed only when the robot has
    never visited the cell and has never updated any of its entries (all
    four visit counts are zero).  Installed rows are hearsay, so visit
    counts stay zero and a later report may overwrite them.  Mutates q in
    place and returns it.
    """
    if visited_locally:
        return q
    visits = q._visits.get(s_remote)
    if visits is not None and (visits[0] or visits[1] or visits[2] or visits[3]):
        return q
    q._values[s_remote] = [q_remote[0], q_remote[1], q_remote[2], q_remote[3]]
    q._defined[s_remote] = 15
    if visits is None:
        q._visits[s_remote] = [0, 0, 0, 0]
    return q


def build_qcop(tables: Sequence[QTable], submazes: Sequence[SubMaze]) -> QTable:
    """Stitch per-region tables into one cooperative table.

    Every region's defined entries are copied across; regions must not
    claim the same (cell, action) entry, and the result has exactly the
    sum of the inputs' entry counts.  Visit counts restart at zero: the
    mission phase counts its own experience.
    """
    if len(tables) != len(submazes):
        raise ValueError("need one table per region")
    combined = QTable()
    for table, sub in zip(tables, submazes):
        for cell in sorted(table.cells()):
            mask = table.defined_mask(cell)
            if not mask:
                continue
            if not sub.contains(cell):
                raise OverlapError(f"region {sub.region_id} defines out-of-region cell {cell}")
            prior = combined.defined_mask(cell)
            if prior & mask:
                raise OverlapError(f"duplicate entries for cell {cell}")
            for a in ACTIONS:
                if mask & (1 << a):
                    combined.set_entry(cell, a, table.get(cell, a), 0)
    return combined


# Branch preferences cycled across pretraining episodes.  All four keep the
# E < S < W relative order, so small regions still learn one coherent
# circulation, while the shifting priority of North makes successive sweeps
# end in different cells (otherwise the final cell of the single fixed sweep
# would never be exited and would keep an empty table row).
_SWEEP_ORDERS = (
    (Action.NORTH, Action.EAST, Action.SOUTH, Action.WEST),
    (Action.EAST, Action.NORTH, Action.SOUTH, Action.WEST),
    (Action.EAST, Action.SOUTH, Action.NORTH, Action.WEST),
    (Action.EAST, Action.SOUTH, Action.WEST, Action.NORTH),
)


def pretrain_submaze(sub: SubMaze, params: RLParams, episodes: int,
                     rng: random.Random) -> QTable:
    """Train one robot alone inside a sealed region.

    Each episode starts from the region corner nearest the robot's global
    start corner, with fresh map knowledge and visit trail but a persistent
    Q table.  An episode ends when every region cell reachable from the
    start has been visited, or after 10x the region cell count steps.

    Learning is off-policy: the behavior is a depth-first round trip (take
    the first unvisited neighbor in the episode's branch order, else
    retreat one step along the walked path, ending back at the corner)
    while the value updates stay plain one-step Q-learning.  The round
    trip crosses each passage at most once per direction, so the imprint
    it leaves is sharp: outbound passages keep value 0 while every
    homeward passage collects the loop penalty.  Greedy action choice
    over that table flows away from the corner everywhere in the region,
    which is what makes the rollout sweep instead of dithering.  An
    epsilon-greedy behavior would bury the imprint under loop penalties
    long before the region is covered.
    """
    q = QTable()
    start = _region_start(sub)
    step_cap = 10 * sub.cell_count()
    region = (sub.row0, sub.col0, sub.row1, sub.col1)
    moves_table = {cell: sub.open_moves(cell) for cell in sub.cells()}
    legal_table = {cell: [a for a, _ in mv] for cell, mv in moves_table.items()}
    walls_table = {cell: sub.wall_mask(cell) for cell in sub.cells()}

    for episode in range(episodes):
        order = _SWEEP_ORDERS[episode % len(_SWEEP_ORDERS)]
        local_map = LocalMap(sub.parent.width, sub.parent.height, region)
        visited = {start}
        trail = [start]
        pos = start
        local_map.observe(pos, walls_table[pos])
        d_prev = goal_distance(local_map, pos)
        for _ in range(step_cap):
            moves = moves_table[pos]
            step = next(((a, t) for a in order for b, t in moves
                         if b == a and t not in visited), None)
            if step is None:
                if len(trail) < 2:
                    break
                trail.pop()
                step = (action_between(pos, trail[-1]), trail[-1])
            else:
                trail.append(step[1])
            a, nxt = step
            looped = nxt in visited
            prev = pos
            pos = nxt
            if not looped:
                visited.add(pos)
                local_map.observe(pos, walls_table[pos])
            d_curr = goal_distance(local_map, pos)
            r = reward(RewardInputs(d_prev, d_curr, looped), params)
            q_update(q, prev, a, r, pos, params, next_actions=legal_table[pos])
            d_prev = d_curr
    return q


def _region_start(sub: SubMaze) -> Cell:
    """Region corner matching the global corner assignment for its id."""
    parent = sub.parent
    corners = {(0, 0): (sub.row0, sub.col0),
               (0, parent.width - 1): (sub.row0, sub.col1 - 1),
               (parent.height - 1, 0): (sub.row1 - 1, sub.col0),
               (parent.height - 1, parent.width - 1): (sub.row1 - 1, sub.col1 - 1)}
    global_corners = [(0, 0), (0, parent.width - 1),
                      (parent.height - 1, 0), (parent.height - 1, parent.width - 1)]
    target = global_corners[sub.region_id % 4]
    if sub.contains(target):
        return target
    return corners[target]


def _region_reachable(sub: SubMaze, start: Cell) -> set[Cell]:
    seen = {start}
    queue = [start]
    for cell in queue:
        for _, nxt in sub.open_moves(cell):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def write_q_snapshot(q: QTable, fh: IO[str]) -> None:
    """Dump defined entries as CSV rows row,col,action,value,visits,
    sorted by (row, col, action)."""
    writer = csv.writer(fh)
    writer.writerow(["row", "col", "action", "value", "visits"])
    for cell in sorted(q.cells()):
        mask = q.defined_mask(cell)
        for a in ACTIONS:
            if mask & (1 << a):
                writer.writerow([cell[0], cell[1], a.name,
                                 repr(q.get(cell, a)), q.visit_count(cell, a)])


__all__ = [
    "RLParams", "QTable", "NoLegalAction", "OverlapError", "RewardInputs",
    "q_update", "reward", "goal_distance", "select_action", "merge_remote",
    "build_qcop", "pretrain_submaze", "write_q_snapshot",
]
