"""Per-robot map knowledge and frontier distances."""

import random
from collections import deque

from hypothesis import given, settings
from hypothesis import strategies as st

from mazeswarm import LocalMap, generate_maze
from mazeswarm.maze import ACTIONS, step_cell

from conftest import open_maze


def observe_cells(maze, local_map, cells):
    for cell in cells:
        local_map.observe(cell, maze.wall_mask(cell))


def test_observe_mirrors_onto_neighbors():
    maze = open_maze(3, 3)
    lm = LocalMap(3, 3)
    lm.observe((1, 1), maze.wall_mask((1, 1)))
    assert lm.known_mask[(1, 1)] == 15
    assert (1, 1) in lm.explored
    # each neighbor learned exactly the wall facing back at (1,1)
    for a in ACTIONS:
        nxt = step_cell((1, 1), a)
        assert lm.known_mask[nxt] != 0
        assert nxt not in lm.explored


def test_mark_explored_respects_universe():
    lm = LocalMap(3, 3)
    lm.mark_explored((2, 2))
    lm.mark_explored((5, 5))
    assert (2, 2) in lm.explored
    assert (5, 5) not in lm.explored


def test_frontier_on_own_cell_is_one():
    maze = open_maze(4, 4)
    lm = LocalMap(4, 4)
    lm.observe((0, 0), maze.wall_mask((0, 0)))
    assert lm.is_frontier((0, 0))
    assert lm.frontier_distance((0, 0)) == 1


def test_fully_explored_map_distance_is_one():
    maze = open_maze(2, 2)
    lm = LocalMap(2, 2)
    observe_cells(maze, lm, maze.cells())
    assert not any(lm.is_frontier(c) for c in maze.cells())
    assert lm.frontier_distance((0, 0)) == 1


def _frontier_bfs_oracle(lm, start):
    """Shortest known-open path to a frontier or never-explored cell."""
    if lm.is_frontier(start):
        return 1
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        cell, dist = queue.popleft()
        known = lm.known_mask.get(cell, 0)
        walls = lm.wall_mask.get(cell, 0)
        for a in ACTIONS:
            bit = 1 << a
            if not known & bit or walls & bit:
                continue
            nxt = step_cell(cell, a)
            if nxt in seen or not lm.in_universe(nxt):
                continue
            seen.add(nxt)
            if nxt not in lm.explored or lm.is_frontier(nxt):
                return dist + 1
            queue.append((nxt, dist + 1))
    return 1


def test_distance_to_far_unknown_corner():
    maze = open_maze(4, 4)
    lm = LocalMap(4, 4)
    observe_cells(maze, lm, (c for c in maze.cells() if c != (3, 3)))
    # (3,3) is known through its neighbors but never explored, so the
    # frontier is the pair of cells adjacent to it; from the opposite
    # corner that is a five-step walk on the open grid
    assert lm.frontier_distance((0, 0)) == _frontier_bfs_oracle(lm, (0, 0))
    assert lm.frontier_distance((0, 0)) == 5
    assert lm.frontier_distance((3, 3)) == 1


@given(st.integers(min_value=0, max_value=5_000), st.data())
@settings(max_examples=50)
def test_frontier_distance_matches_oracle(seed, data):
    rng = random.Random(seed)
    maze = generate_maze(5, 5, rng, braid=0.2)
    cells = list(maze.cells())
    subset = data.draw(st.sets(st.sampled_from(cells), min_size=1))
    lm = LocalMap(5, 5)
    observe_cells(maze, lm, sorted(subset))
    start = data.draw(st.sampled_from(sorted(subset)))
    assert lm.frontier_distance(start) == _frontier_bfs_oracle(lm, start)


def test_region_restricts_universe():
    maze = open_maze(4, 4)
    lm = LocalMap(4, 4, region=(0, 0, 2, 2))
    observe_cells(maze, lm, [(0, 0), (0, 1), (1, 0), (1, 1)])
    # region fully explored: no frontier even though the real maze goes on
    assert lm.frontier_distance((0, 0)) == 1
    assert not lm.in_universe((0, 2))
