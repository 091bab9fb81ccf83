"""Per-robot map knowledge: which cells and walls have been observed."""

from __future__ import annotations

from collections import deque

from .maze import ACTIONS, DELTAS, OPPOSITE, Cell


class LocalMap:
    """What one robot knows about the grid.

    Tracks, per cell, a bitmask of walls whose presence/absence is known
    (`known_mask`) and the subset of those that are present (`wall_mask`).
    `explored` holds cells the robot believes have been visited by someone,
    its own trail plus marks heard over the radio.  An optional `region`
    restricts the universe to a sub-rectangle; cells outside it do not
    exist for frontier purposes.
    """

    __slots__ = ("width", "height", "region", "known_mask", "wall_mask", "explored")

    def __init__(self, width: int, height: int,
                 region: tuple[int, int, int, int] | None = None):
        self.width = width
        self.height = height
        self.region = region
        self.known_mask: dict[Cell, int] = {}
        self.wall_mask: dict[Cell, int] = {}
        self.explored: set[Cell] = set()

    def in_universe(self, cell: Cell) -> bool:
        if self.region is not None:
            r0, c0, r1, c1 = self.region
            return r0 <= cell[0] < r1 and c0 <= cell[1] < c1
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def observe(self, cell: Cell, walls: int) -> None:
        """Record the full wall set of a cell the robot stands on.

        Each wall observation is mirrored onto the neighbor cell, so a
        neighbor glimpsed through an open wall becomes known-partially
        before it is ever visited.
        """
        self.known_mask[cell] = 15
        self.wall_mask[cell] = walls
        self.explored.add(cell)
        for a in ACTIONS:
            nxt = (cell[0] + DELTAS[a][0], cell[1] + DELTAS[a][1])
            if not self.in_universe(nxt):
                continue
            bit = 1 << OPPOSITE[a]
            self.known_mask[nxt] = self.known_mask.get(nxt, 0) | bit
            if walls & (1 << a):
                self.wall_mask[nxt] = self.wall_mask.get(nxt, 0) | bit

    def mark_explored(self, cell: Cell) -> None:
        """Record a remote report that some robot has visited cell."""
        if self.in_universe(cell):
            self.explored.add(cell)

    def is_frontier(self, cell: Cell) -> bool:
        """A known cell adjacent to unexplored space.

        A direction counts as unexplored when the neighbor exists, has not
        been explored, and the wall toward it is not known to be present.
        """
        known = self.known_mask.get(cell, 0)
        walls = self.wall_mask.get(cell, 0)
        for a in ACTIONS:
            bit = 1 << a
            if known & bit and walls & bit:
                continue
            nxt = (cell[0] + DELTAS[a][0], cell[1] + DELTAS[a][1])
            if self.in_universe(nxt) and nxt not in self.explored:
                return True
        return False

    def frontier_distance(self, start: Cell) -> int:
        """BFS steps from start to the nearest frontier cell, clamped >= 1.

        Travel is allowed only through walls known to be open.  Returns 1
        when no frontier is reachable (fully explored map) and also clamps
        distance 0 (standing on the frontier) up to 1, so the value is
        always a safe divisor.
        """
        if self.is_frontier(start):
            return 1
        explored = self.explored
        seen = {start}
        queue = deque([(start, 0)])
        while queue:
            cell, dist = queue.popleft()
            known = self.known_mask.get(cell, 0)
            walls = self.wall_mask.get(cell, 0)
            for a in ACTIONS:
                bit = 1 << a
                if not known & bit or walls & bit:
                    continue
                nxt = (cell[0] + DELTAS[a][0], cell[1] + DELTAS[a][1])
                if nxt in seen or not self.in_universe(nxt):
                    continue
                seen.add(nxt)
                # Cells never visited by anyone count as targets themselves:
                # coverage needs a physical visit even when their walls are
                # already known from next door.
                if nxt not in explored or self.is_frontier(nxt):
                    return dist + 1
                queue.append((nxt, dist + 1))
        return 1
