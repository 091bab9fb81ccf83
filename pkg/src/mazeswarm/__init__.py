"""Deterministic multi-robot maze exploration with cooperative Q-learning."""

from .agents import (DfsDecision, DfsState, MemoryGreedyState, StackUnderflow,
                     dfs_step, memory_greedy_step)
from .engine import (AGENT_DFS, AGENT_KINDS, AGENT_MEMORY_GREEDY,
                     AGENT_PROPOSED, MetricsRow, MissionResult, RobotState,
                     SimulationFault, WorldState, build_world, coverage_pct,
                     overlap_pct, resolve_collisions, run_mission, sense, tick,
                     write_metrics_csv)
from .experiment import (ConfigError, ExperimentConfig, SweepReport,
                         emit_report, load_config, parse_config, run_sweep,
                         serialize_config)
from .mapping import LocalMap
from .maze import (Action, BadDecomposition, Cell, MalformedMaze, Maze,
                   SubMaze, corner_cells, decompose, generate_maze, load_maze,
                   maze_from_maz_bytes, maze_to_maz_bytes, parse_maze,
                   passable, reachable_cells, serialize_maze)
from .net import (DecodeError, LinkStats, NetConfig, NetMessage, WIRE_SIZE,
                  broadcast_round, decode_message, encode_message, in_range,
                  transmit)
from .qlearn import (NoLegalAction, OverlapError, QTable, RewardInputs,
                     RLParams, build_qcop, goal_distance, merge_remote,
                     pretrain_submaze, q_update, reward, select_action,
                     write_q_snapshot)

__version__ = "0.1.0"
