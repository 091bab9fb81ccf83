"""Grid mazes with post-and-wall ASCII serialization.

A maze is a rectangular grid of cells addressed (row, col) with row 0 at
the top.  Walls sit between adjacent cells and on the outer boundary;
interior walls are always consistent between the two cells they separate.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator

Cell = tuple[int, int]

DEFAULT_CELL_PITCH_PX = 100.0


class Action(IntEnum):
    """Movement directions in canonical tie-break order."""

    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3


ACTIONS = (Action.NORTH, Action.EAST, Action.SOUTH, Action.WEST)

# Wall bitmask bits, one per direction: bit(a) == 1 << a.
WALL_N, WALL_E, WALL_S, WALL_W = 1, 2, 4, 8
ALL_WALLS = WALL_N | WALL_E | WALL_S | WALL_W

# (drow, dcol) per action, indexed by Action value.
DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))

OPPOSITE = (Action.SOUTH, Action.WEST, Action.NORTH, Action.EAST)


def step_cell(cell: Cell, action: Action) -> Cell:
    dr, dc = DELTAS[action]
    return (cell[0] + dr, cell[1] + dc)


def action_between(src: Cell, dst: Cell) -> Action:
    """Direction of a single-step move from src to dst (must be adjacent)."""
    delta = (dst[0] - src[0], dst[1] - src[1])
    return ACTIONS[DELTAS.index(delta)]


class MalformedMaze(ValueError):
    """Raised when maze text violates the grid format.

    Carries the offending 1-based line and column so callers can point at
    the exact character.
    """

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class Maze:
    """Immutable maze grid.

    `walls[r * width + c]` is the wall bitmask of cell (r, c).  The
    constructor enforces boundary walls and interior consistency, then
    precomputes the open-move table used by every traversal.
    """

    __slots__ = ("width", "height", "cell_pitch_px", "walls", "open_moves")

    def __init__(self, width: int, height: int, walls: list[int],
                 cell_pitch_px: float = DEFAULT_CELL_PITCH_PX):
        if width < 1 or height < 1:
            raise ValueError("maze dimensions must be positive")
        if len(walls) != width * height:
            raise ValueError("wall table size does not match dimensions")
        self.width = width
        self.height = height
        self.cell_pitch_px = cell_pitch_px
        self.walls = tuple(walls)
        self._check_consistency()
        self.open_moves = self._build_open_moves()

    def _check_consistency(self) -> None:
        w, h = self.width, self.height
        for r in range(h):
            for c in range(w):
                mask = self.walls[r * w + c]
                if mask & ~ALL_WALLS:
                    raise ValueError(f"bad wall mask at {(r, c)}")
                for a in ACTIONS:
                    nr, nc = r + DELTAS[a][0], c + DELTAS[a][1]
                    if not (0 <= nr < h and 0 <= nc < w):
                        if not mask & (1 << a):
                            raise ValueError(f"missing boundary wall at {(r, c)}")
                    else:
                        other = self.walls[nr * w + nc]
                        if bool(mask & (1 << a)) != bool(other & (1 << OPPOSITE[a])):
                            raise ValueError(f"inconsistent wall between {(r, c)} and {(nr, nc)}")

    def _build_open_moves(self) -> dict[Cell, tuple[tuple[Action, Cell], ...]]:
        table: dict[Cell, tuple[tuple[Action, Cell], ...]] = {}
        w = self.width
        for r in range(self.height):
            for c in range(w):
                mask = self.walls[r * w + c]
                moves = []
                for a in ACTIONS:
                    if not mask & (1 << a):
                        moves.append((a, (r + DELTAS[a][0], c + DELTAS[a][1])))
                table[(r, c)] = tuple(moves)
        return table

    def wall_mask(self, cell: Cell) -> int:
        return self.walls[cell[0] * self.width + cell[1]]

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def cells(self) -> Iterator[Cell]:
        for r in range(self.height):
            for c in range(self.width):
                yield (r, c)

    def key(self) -> tuple:
        """Hashable identity used for caching derived artifacts."""
        return (self.width, self.height, self.walls)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Maze) and self.width == other.width
                and self.height == other.height and self.walls == other.walls)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Maze({self.width}x{self.height})"


def passable(maze: Maze, a: Cell, b: Cell) -> bool:
    """True when a and b are adjacent and the wall between them is open.

    Delegates to the precomputed move table, so it is symmetric by
    construction.
    """
    if not (maze.in_bounds(a) and maze.in_bounds(b)):
        return False
    for _, target in maze.open_moves[a]:
        if target == b:
            return True
    return False


def reachable_cells(maze: Maze, start: Cell) -> set[Cell]:
    """All cells reachable from start through open walls (BFS flood)."""
    if not maze.in_bounds(start):
        raise ValueError(f"start cell {start} out of bounds")
    seen = {start}
    queue = [start]
    open_moves = maze.open_moves
    for cell in queue:
        for _, nxt in open_moves[cell]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


# --- ASCII format ---------------------------------------------------------
#
# A maze of H rows and W cols renders as 2H+1 text lines of 2W+1 chars.
# Even line/col positions are posts '+', odd-line even-col positions are
# vertical walls '|' or ' ', even-line odd-col are horizontal walls '-' or
# ' ', and odd/odd positions are cell interiors ' '.

def parse_maze(text: str, cell_pitch_px: float = DEFAULT_CELL_PITCH_PX) -> Maze:
    """Parse post-and-wall ASCII text into a Maze.

    Raises MalformedMaze with a 1-based line/column for the first
    offending character.
    """
    if not text.endswith("\n"):
        lines = text.split("\n")
        raise MalformedMaze("missing trailing newline", len(lines), len(lines[-1]) + 1)
    lines = text.split("\n")[:-1]
    if len(lines) < 3 or len(lines) % 2 == 0:
        raise MalformedMaze(f"need an odd number of lines >= 3, got {len(lines)}",
                            len(lines), 1)
    height = (len(lines) - 1) // 2
    width_chars = len(lines[0])
    if width_chars < 3 or width_chars % 2 == 0:
        raise MalformedMaze(f"need an odd line length >= 3, got {width_chars}", 1, 1)
    width = (width_chars - 1) // 2

    for i, line in enumerate(lines):
        if len(line) != width_chars:
            raise MalformedMaze(
                f"line length {len(line)} != {width_chars}", i + 1, len(line) + 1)

    def bad(i: int, j: int, msg: str) -> MalformedMaze:
        return MalformedMaze(f"{msg}, got {lines[i][j]!r}", i + 1, j + 1)

    walls = [0] * (width * height)
    for i, line in enumerate(lines):
        for j, ch in enumerate(line):
            if i % 2 == 0 and j % 2 == 0:
                if ch != "+":
                    raise bad(i, j, "expected post '+'")
            elif i % 2 == 0:
                if ch not in "- ":
                    raise bad(i, j, "expected '-' or ' '")
            elif j % 2 == 0:
                if ch not in "| ":
                    raise bad(i, j, "expected '|' or ' '")
            else:
                if ch != " ":
                    raise bad(i, j, "expected cell interior ' '")

    for r in range(height):
        for c in range(width):
            mask = 0
            if lines[2 * r][2 * c + 1] == "-":
                mask |= WALL_N
            if lines[2 * r + 2][2 * c + 1] == "-":
                mask |= WALL_S
            if lines[2 * r + 1][2 * c] == "|":
                mask |= WALL_W
            if lines[2 * r + 1][2 * c + 2] == "|":
                mask |= WALL_E
            walls[r * width + c] = mask

    # Boundary walls must be drawn; report the first gap precisely.
    for c in range(width):
        if lines[0][2 * c + 1] != "-":
            raise MalformedMaze("open wall on top boundary", 1, 2 * c + 2)
        if lines[2 * height][2 * c + 1] != "-":
            raise MalformedMaze("open wall on bottom boundary", 2 * height + 1, 2 * c + 2)
    for r in range(height):
        if lines[2 * r + 1][0] != "|":
            raise MalformedMaze("open wall on left boundary", 2 * r + 2, 1)
        if lines[2 * r + 1][2 * width] != "|":
            raise MalformedMaze("open wall on right boundary", 2 * r + 2, 2 * width + 1)

    return Maze(width, height, walls, cell_pitch_px)


def serialize_maze(maze: Maze) -> str:
    """Render a maze back to ASCII; inverse of parse_maze, byte for byte."""
    w, h = maze.width, maze.height
    out = []
    for r in range(h):
        top = ["+"]
        mid = []
        for c in range(w):
            mask = maze.walls[r * w + c]
            top.append("-" if mask & WALL_N else " ")
            top.append("+")
            mid.append("|" if mask & WALL_W else " ")
            mid.append(" ")
        mid.append("|" if maze.walls[r * w + w - 1] & WALL_E else " ")
        out.append("".join(top))
        out.append("".join(mid))
    bottom = ["+"]
    for c in range(w):
        bottom.append("-" if maze.walls[(h - 1) * w + c] & WALL_S else " ")
        bottom.append("+")
    out.append("".join(bottom))
    return "\n".join(out) + "\n"


def load_maze(path: str, cell_pitch_px: float = DEFAULT_CELL_PITCH_PX) -> Maze:
    with open(path, "r", encoding="ascii") as fh:
        return parse_maze(fh.read(), cell_pitch_px)


# --- binary micromouse format ---------------------------------------------

def maze_from_maz_bytes(data: bytes, cell_pitch_px: float = DEFAULT_CELL_PITCH_PX) -> Maze:
    """Decode the classic binary micromouse layout.

    One byte per cell, columns stored left to right and each column bottom
    to top; bits 1/2/4/8 are walls N/E/S/W.  The side length is the square
    root of the byte count.
    """
    side = math.isqrt(len(data))
    if side * side != len(data) or side < 1:
        raise ValueError(f"byte count {len(data)} is not a positive square")
    walls = [0] * (side * side)
    for col in range(side):
        for row_from_bottom in range(side):
            mask = data[col * side + row_from_bottom]
            if mask & ~ALL_WALLS:
                raise ValueError(f"bad wall byte {mask:#x} at column {col}")
            r = side - 1 - row_from_bottom
            walls[r * side + col] = mask
    return Maze(side, side, walls, cell_pitch_px)


def maze_to_maz_bytes(maze: Maze) -> bytes:
    if maze.width != maze.height:
        raise ValueError("binary layout requires a square maze")
    side = maze.width
    out = bytearray(side * side)
    for col in range(side):
        for row_from_bottom in range(side):
            r = side - 1 - row_from_bottom
            out[col * side + row_from_bottom] = maze.walls[r * side + col]
    return bytes(out)


# --- region decomposition --------------------------------------------------

@dataclass(frozen=True)
class SubMaze:
    """A rectangular region of a parent maze, half-open bounds [row0, row1) x [col0, col1)."""

    parent: Maze
    region_id: int
    row0: int
    col0: int
    row1: int
    col1: int

    def cells(self) -> Iterator[Cell]:
        for r in range(self.row0, self.row1):
            for c in range(self.col0, self.col1):
                yield (r, c)

    def cell_count(self) -> int:
        return (self.row1 - self.row0) * (self.col1 - self.col0)

    def contains(self, cell: Cell) -> bool:
        return self.row0 <= cell[0] < self.row1 and self.col0 <= cell[1] < self.col1

    def wall_mask(self, cell: Cell) -> int:
        """Parent walls plus synthetic walls sealing the region boundary."""
        mask = self.parent.wall_mask(cell)
        for a in ACTIONS:
            if not self.contains(step_cell(cell, a)):
                mask |= 1 << a
        return mask

    def open_moves(self, cell: Cell) -> tuple[tuple[Action, Cell], ...]:
        return tuple((a, t) for a, t in self.parent.open_moves[cell] if self.contains(t))


class BadDecomposition(ValueError):
    pass


def decompose(maze: Maze, k: int) -> list[SubMaze]:
    """Split a maze into k equal rectangular regions, k in {1, 2, 4}.

    k=2 gives left/right halves; k=4 quadrants in reading order (top-left,
    top-right, bottom-left, bottom-right).  Region ids follow that order.
    """
    w, h = maze.width, maze.height
    if k == 1:
        return [SubMaze(maze, 0, 0, 0, h, w)]
    if k == 2:
        if w % 2:
            raise BadDecomposition(f"width {w} not divisible by 2")
        half = w // 2
        return [SubMaze(maze, 0, 0, 0, h, half),
                SubMaze(maze, 1, 0, half, h, w)]
    if k == 4:
        if w % 2 or h % 2:
            raise BadDecomposition(f"dimensions {w}x{h} not divisible by 2")
        hw, hh = w // 2, h // 2
        return [SubMaze(maze, 0, 0, 0, hh, hw),
                SubMaze(maze, 1, 0, hw, hh, w),
                SubMaze(maze, 2, hh, 0, h, hw),
                SubMaze(maze, 3, hh, hw, h, w)]
    raise BadDecomposition(f"region count must be 1, 2 or 4, got {k}")


def corner_cells(maze: Maze, n: int) -> list[Cell]:
    """Start corners for up to four robots, id order TL, TR, BL, BR."""
    corners = [(0, 0), (0, maze.width - 1),
               (maze.height - 1, 0), (maze.height - 1, maze.width - 1)]
    if not 1 <= n <= 4:
        raise ValueError(f"robot count must be 1..4, got {n}")
    return corners[:n]


# --- generation -------------------------------------------------------------

def _open_wall(walls: list[int], width: int, cell: Cell, a: Action) -> None:
    nxt = (cell[0] + DELTAS[a][0], cell[1] + DELTAS[a][1])
    walls[cell[0] * width + cell[1]] &= ~(1 << a)
    walls[nxt[0] * width + nxt[1]] &= ~(1 << OPPOSITE[a])


def _carve(walls: list[int], width: int, rng: random.Random,
           r0: int, c0: int, r1: int, c1: int,
           straightness: float = 0.0) -> None:
    """Depth-first spanning-tree carve confined to [r0,r1) x [c0,c1).

    straightness is the probability of continuing in the previous carve
    direction when possible; higher values give long corridors and few
    junctions instead of twisty passages.
    """
    start = (r0, c0)
    stack: list[tuple[Cell, Action | None]] = [(start, None)]
    seen = {start}
    while stack:
        (r, c), came = stack[-1]
        options = []
        for a in ACTIONS:
            nxt = (r + DELTAS[a][0], c + DELTAS[a][1])
            if r0 <= nxt[0] < r1 and c0 <= nxt[1] < c1 and nxt not in seen:
                options.append((a, nxt))
        if not options:
            stack.pop()
            continue
        pick = None
        if came is not None and straightness > 0.0 and rng.random() < straightness:
            pick = next(((a, nxt) for a, nxt in options if a == came), None)
        if pick is None:
            pick = options[rng.randrange(len(options))]
        a, nxt = pick
        _open_wall(walls, width, (r, c), a)
        seen.add(nxt)
        stack.append((nxt, a))


def _braid(walls: list[int], width: int, rng: random.Random, fraction: float,
           r0: int, c0: int, r1: int, c1: int) -> None:
    """Open one extra wall on the given fraction of dead ends in the bounds."""
    dead_ends = [(r, c) for r in range(r0, r1) for c in range(c0, c1)
                 if bin(walls[r * width + c]).count("1") == 3]
    rng.shuffle(dead_ends)
    for cell in dead_ends[:round(len(dead_ends) * fraction)]:
        closed = []
        for a in ACTIONS:
            nxt = (cell[0] + DELTAS[a][0], cell[1] + DELTAS[a][1])
            if (r0 <= nxt[0] < r1 and c0 <= nxt[1] < c1
                    and walls[cell[0] * width + cell[1]] & (1 << a)):
                closed.append(a)
        if closed:
            _open_wall(walls, width, cell, closed[rng.randrange(len(closed))])


def _sweep_visit_times(walls: list[int], width: int, start: Cell,
                       bounds: tuple[int, int, int, int]) -> dict[Cell, int]:
    """First-visit step of each bounds cell under a canonical-order
    depth-first walk from start.

    This mirrors the walk a greedy corner robot settles into, so a cell's
    first-visit time says how much of the quadrant the robot has behind it
    when it first stands there.
    """
    r0, c0, r1, c1 = bounds
    visit = {start: 0}
    stack = [start]
    step = 0
    while stack:
        r, c = stack[-1]
        mask = walls[r * width + c]
        nxt = None
        for a in ACTIONS:
            if mask & (1 << a):
                continue
            cand = (r + DELTAS[a][0], c + DELTAS[a][1])
            if (r0 <= cand[0] < r1 and c0 <= cand[1] < c1
                    and cand not in visit):
                nxt = cand
                break
        if nxt is None:
            stack.pop()
            continue
        step += 1
        visit[nxt] = step
        stack.append(nxt)
    return visit


def generate_maze(width: int, height: int, rng: random.Random,
                  braid: float = 0.0, quadrant_gates: int = 0,
                  straightness: float = 0.0,
                  cell_pitch_px: float = DEFAULT_CELL_PITCH_PX) -> Maze:
    """Generate a connected random maze.

    braid opens one extra wall on that fraction of dead ends, adding loops.
    With quadrant_gates > 0 (even dimensions only), each quadrant is carved
    as its own fully connected maze and that many wall openings are punched
    through each of the four quadrant borders — every quadrant is then
    internally connected, which is the regime regional pretraining targets.

    Gate slots are not random: each border has a side whose crossing action
    sorts early in the canonical N,E,S,W order (north for a horizontal
    border, east for a vertical one), and a corner robot on that side will
    funnel through such an opening the moment its sweep first touches it.
    The gate therefore goes on the slot that side's corner sweep reaches
    last, so a robot only meets the crossing once its own quadrant is
    essentially done.  Extra gates beyond the first are drawn at random
    from the remaining slots.
    """
    walls = [ALL_WALLS] * (width * height)
    if quadrant_gates:
        if width % 2 or height % 2:
            raise ValueError("quadrant generation needs even dimensions")
        hw, hh = width // 2, height // 2
        quadrants = ((0, 0, hh, hw), (0, hw, hh, width),
                     (hh, 0, height, hw), (hh, hw, height, width))
        for r0, c0, r1, c1 in quadrants:
            _carve(walls, width, rng, r0, c0, r1, c1, straightness)
            if braid > 0.0:
                _braid(walls, width, rng, braid, r0, c0, r1, c1)
        # (slots, eager-side cell of a slot, eager corner, eager quadrant)
        borders = (
            ([((hh - 1, c), Action.SOUTH) for c in range(0, hw)],
             lambda cell: (cell[0] + 1, cell[1]),
             (height - 1, 0), (hh, 0, height, hw)),                   # TL-BL
            ([((hh - 1, c), Action.SOUTH) for c in range(hw, width)],
             lambda cell: (cell[0] + 1, cell[1]),
             (height - 1, width - 1), (hh, hw, height, width)),       # TR-BR
            ([((r, hw - 1), Action.EAST) for r in range(0, hh)],
             lambda cell: cell,
             (0, 0), (0, 0, hh, hw)),                                 # TL-TR
            ([((r, hw - 1), Action.EAST) for r in range(hh, height)],
             lambda cell: cell,
             (height - 1, 0), (hh, 0, height, hw)),                   # BL-BR
        )
        for slots, eager_cell, corner, bounds in borders:
            visit = _sweep_visit_times(walls, width, corner, bounds)
            lead = max(range(len(slots)),
                       key=lambda i: visit.get(eager_cell(slots[i][0]), -1))
            rest = slots[:lead] + slots[lead + 1:]
            picks = [slots[lead]] + rng.sample(
                rest, min(quadrant_gates, len(slots)) - 1)
            for cell, a in picks:
                _open_wall(walls, width, cell, a)
    else:
        _carve(walls, width, rng, 0, 0, height, width, straightness)
        if braid > 0.0:
            _braid(walls, width, rng, braid, 0, 0, height, width)
    return Maze(width, height, walls, cell_pitch_px)
