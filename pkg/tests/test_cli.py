"""Command line behaviour, run in-process through main(argv)."""

import os

from mazeswarm import (load_maze, maze_to_maz_bytes, parse_maze,
                       serialize_maze)
from mazeswarm.cli import EXIT_CONFIG, EXIT_OK, main

from conftest import MAZES_DIR

MAZE_PATH = os.path.join(MAZES_DIR, "maze_01.maze")

CSV_NAMES = ["runs.csv", "time_per_coverage.csv", "coverage_vs_iter.csv",
             "overlap_vs_iter.csv", "range_sweep.csv", "loss_sweep.csv"]


def write_config(tmp_path, **overrides):
    lines = {"mazes": MAZE_PATH, "agents": "proposed", "seeds": "7",
             "max_ticks": "40"}
    lines.update({k: str(v) for k, v in overrides.items()})
    path = tmp_path / "run.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in lines.items()))
    return str(path)


def test_simulate_writes_csv_bundle(tmp_path, capsys):
    out = tmp_path / "results"
    code = main(["simulate", "--config", write_config(tmp_path),
                 "--out", str(out)])
    assert code == EXIT_OK
    assert sorted(os.listdir(out)) == sorted(CSV_NAMES)
    assert "1 runs" in capsys.readouterr().out


def test_simulate_seed_and_agent_overrides(tmp_path):
    out = tmp_path / "results"
    code = main(["simulate", "--config", write_config(tmp_path, agents="proposed, dfs"),
                 "--out", str(out), "--seeds", "3,4", "--agent", "dfs"])
    assert code == EXIT_OK
    with open(out / "runs.csv") as fh:
        rows = fh.read().splitlines()
    assert len(rows) == 3  # header + 2 seeds, single agent
    assert all(",dfs," in row for row in rows[1:])


def test_simulate_missing_config(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "absent.cfg")])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_simulate_bad_seed_override(tmp_path, capsys):
    code = main(["simulate", "--config", write_config(tmp_path),
                 "--seeds", "one,two"])
    assert code == EXIT_CONFIG
    assert "--seeds" in capsys.readouterr().err


def test_simulate_rejects_zero_jobs(tmp_path, capsys):
    code = main(["simulate", "--config", write_config(tmp_path),
                 "--jobs", "0"])
    assert code == EXIT_CONFIG
    assert "--jobs" in capsys.readouterr().err


def test_simulate_empty_maze_list(tmp_path, capsys):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("agents = proposed\n")
    code = main(["simulate", "--config", str(cfg)])
    assert code == EXIT_CONFIG
    assert "mazes" in capsys.readouterr().err


def test_convert_ascii_passthrough(tmp_path):
    out = tmp_path / "copy.maze"
    code = main(["convert-maze", MAZE_PATH, str(out)])
    assert code == EXIT_OK
    assert out.read_text() == serialize_maze(load_maze(MAZE_PATH))


def test_convert_binary_dump(tmp_path):
    maze = load_maze(MAZE_PATH)
    blob = tmp_path / "dump.maz"
    blob.write_bytes(maze_to_maz_bytes(maze))
    out = tmp_path / "converted.maze"
    code = main(["convert-maze", str(blob), str(out)])
    assert code == EXIT_OK
    assert parse_maze(out.read_text()) == maze


def test_convert_garbage_input(tmp_path, capsys):
    junk = tmp_path / "junk.maz"
    junk.write_bytes(b"\x01\x02\x03")
    code = main(["convert-maze", str(junk), str(tmp_path / "out.maze")])
    assert code == EXIT_CONFIG
    assert "not a recognizable maze" in capsys.readouterr().err


def test_convert_missing_input(tmp_path, capsys):
    code = main(["convert-maze", str(tmp_path / "absent.maz"),
                 str(tmp_path / "out.maze")])
    assert code == EXIT_CONFIG
    assert "error" in capsys.readouterr().err
