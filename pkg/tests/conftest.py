import glob
import os

import pytest

from mazeswarm import Maze, load_maze

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MAZES_DIR = os.path.join(REPO_ROOT, "mazes")
CONFIGS_DIR = os.path.join(REPO_ROOT, "configs")


def open_maze(width: int, height: int) -> Maze:
    """Maze with no interior walls, boundary only."""
    walls = []
    for r in range(height):
        for c in range(width):
            mask = 0
            if r == 0:
                mask |= 1  # N
            if c == width - 1:
                mask |= 2  # E
            if r == height - 1:
                mask |= 4  # S
            if c == 0:
                mask |= 8  # W
            walls.append(mask)
    return Maze(width, height, walls)


@pytest.fixture(scope="session")
def corpus_paths() -> list[str]:
    paths = sorted(glob.glob(os.path.join(MAZES_DIR, "maze_*.maze")))
    assert len(paths) == 17, f"expected the 17-maze corpus in {MAZES_DIR}"
    return paths


@pytest.fixture(scope="session")
def corpus(corpus_paths) -> list[Maze]:
    return [load_maze(p) for p in corpus_paths]
