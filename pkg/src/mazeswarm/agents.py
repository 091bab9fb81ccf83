"""Baseline exploration strategies: depth-first search and memory-greedy.

Both are step oracles: given the robot's situation they produce a ranked
list of move candidates.  The first entry is the agent's true choice; the
rest are fallbacks the collision resolver may grant instead, and a stay
candidate is always implied last.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .maze import Action, Cell, action_between
from .qlearn import NoLegalAction, QTable

Move = tuple[Action, Cell]


class StackUnderflow(RuntimeError):
    """DFS has returned to its root with nothing left to explore."""


@dataclass
class DfsState:
    """Classic depth-first wanderer with a backtrack stack.

    path_stack[-1] is the robot's current cell; shared_explored collects
    marks heard from other robots (kept for the record; the walk itself is
    driven by the robot's own visited set, which is what makes the
    strategy redundant but communication-proof).
    """

    path_stack: list[Cell]
    visited: set[Cell]
    shared_explored: set[Cell] = field(default_factory=set)

    @classmethod
    def at(cls, start: Cell) -> "DfsState":
        return cls(path_stack=[start], visited={start})


@dataclass(frozen=True)
class DfsDecision:
    """Chosen move plus alternatives, and whether the move pops the stack."""

    candidates: tuple[Move, ...]
    backtrack: bool


def dfs_step(state: DfsState, moves: Sequence[Move]) -> DfsDecision:
    """Advance to the first unvisited neighbor in N, E, S, W order, else
    backtrack one stack level.

    moves must be the legal moves from the current cell in canonical
    order.  When the stack is at its root and nothing unvisited remains,
    raises StackUnderflow: exploration from this root is finished.
    """
    unvisited = tuple(m for m in moves if m[1] not in state.visited)
    if unvisited:
        return DfsDecision(candidates=unvisited, backtrack=False)
    if len(state.path_stack) < 2:
        raise StackUnderflow(f"exhausted at root {state.path_stack[0]}")
    pos = state.path_stack[-1]
    prev = state.path_stack[-2]
    return DfsDecision(candidates=((action_between(pos, prev), prev),), backtrack=True)


def dfs_apply(state: DfsState, decision: DfsDecision, new_pos: Cell) -> None:
    """Update the stack after the resolver granted a move (or none).

    A granted backtrack pops; any other actual move pushes.  A denied move
    (new_pos is the current cell) leaves the stack alone, so the intent is
    simply retried next tick.
    """
    if new_pos == state.path_stack[-1]:
        return
    if decision.backtrack and len(state.path_stack) >= 2 and new_pos == state.path_stack[-2]:
        state.path_stack.pop()
    else:
        state.path_stack.append(new_pos)
        state.visited.add(new_pos)


@dataclass
class MemoryGreedyState:
    """Q-greedy policy hedged by a visit memory.

    Scores each candidate as Q(s, a) minus crowding_weight times the
    robot's own visit count of the target cell, breaking ties in N, E, S,
    W order; with probability explore_rate it moves uniformly at random.
    """

    visit_memory: dict[Cell, int]
    crowding_weight: float = 0.1
    explore_rate: float = 0.1

    @classmethod
    def at(cls, start: Cell) -> "MemoryGreedyState":
        return cls(visit_memory={start: 1})


def memory_greedy_step(state: MemoryGreedyState, q: QTable, pos: Cell,
                       moves: Sequence[Move], rng: random.Random
                       ) -> tuple[Move, ...]:
    """Rank the legal moves for a memory-greedy robot, best first."""
    if not moves:
        raise NoLegalAction(f"no legal action at {pos}")
    memory = state.visit_memory
    scored = [(q.get(pos, a) - state.crowding_weight * memory.get(target, 0), a, target)
              for a, target in moves]
    # Stable sort on negated score keeps canonical order among ties.
    scored.sort(key=lambda item: -item[0])
    ranked = tuple((a, target) for _, a, target in scored)
    if rng.random() < state.explore_rate:
        pick = rng.randrange(len(ranked))
        if pick:
            chosen = ranked[pick]
            return (chosen,) + tuple(m for m in ranked if m is not chosen)
    return ranked


def memory_greedy_apply(state: MemoryGreedyState, new_pos: Cell) -> None:
    state.visit_memory[new_pos] = state.visit_memory.get(new_pos, 0) + 1
