"""Degradable broadcast radio between robots.

Replaces a full network emulator with the properties the simulation
actually exercises: a circular range cutoff, independent Bernoulli loss
per receiver, and traffic accounting.  The configured propagation delay is
orders of magnitude below one simulation tick, so delivery lands in the
same tick it was sent; bandwidth is recorded for reporting, desk-scale
traffic never approaches it.
"""

from __future__ import annotations

import csv
import random
import struct
from dataclasses import dataclass, field
from typing import IO, Sequence

from .maze import DEFAULT_CELL_PITCH_PX, Cell

_WIRE = struct.Struct("<4sBIBBB4d")
WIRE_MAGIC = b"SWQM"
WIRE_SIZE = _WIRE.size  # 44 bytes


@dataclass(frozen=True)
class NetConfig:
    range_px: float = 1500.0
    loss_prob: float = 0.0
    delay_us: float = 0.2
    bandwidth_mbps: float = 54.0


@dataclass(frozen=True)
class NetMessage:
    """One broadcast: sender's position, its Q row there, and an explored
    mark for that cell."""

    sender: int
    tick: int
    pos: Cell
    qvals: tuple[float, float, float, float]
    mark: bool = True


class DecodeError(ValueError):
    """Wire bytes are not a valid message frame."""


def encode_message(msg: NetMessage) -> bytes:
    """Pack a message into the fixed 44-byte wire frame.

    Little endian: 4-byte magic, u8 sender, u32 tick, u8 row, u8 col,
    u8 mark, then the four q values as f64 (bit-exact round trip).
    """
    if not 0 <= msg.sender <= 0xFF:
        raise ValueError(f"sender id {msg.sender} out of wire range")
    if not 0 <= msg.tick <= 0xFFFFFFFF:
        raise ValueError(f"tick {msg.tick} out of wire range")
    if not (0 <= msg.pos[0] <= 0xFF and 0 <= msg.pos[1] <= 0xFF):
        raise ValueError(f"position {msg.pos} out of wire range")
    return _WIRE.pack(WIRE_MAGIC, msg.sender, msg.tick, msg.pos[0], msg.pos[1],
                      1 if msg.mark else 0, *msg.qvals)


def decode_message(data: bytes) -> NetMessage:
    """Inverse of encode_message; raises DecodeError on any malformed frame."""
    if len(data) != WIRE_SIZE:
        raise DecodeError(f"frame must be {WIRE_SIZE} bytes, got {len(data)}")
    magic, sender, tick, row, col, mark, q0, q1, q2, q3 = _WIRE.unpack(data)
    if magic != WIRE_MAGIC:
        raise DecodeError(f"bad magic {magic!r}")
    if mark > 1:
        raise DecodeError(f"bad mark byte {mark}")
    return NetMessage(sender, tick, (row, col), (q0, q1, q2, q3), bool(mark))


@dataclass
class LinkStats:
    """Cumulative traffic counters, total and per directed link."""

    sent: int = 0
    delivered: int = 0
    dropped: int = 0
    bytes_sent: int = 0
    per_link: dict[tuple[int, int], list[int]] = field(default_factory=dict)

    def record(self, link: tuple[int, int] | None, delivered: bool) -> None:
        self.sent += 1
        self.bytes_sent += WIRE_SIZE
        if delivered:
            self.delivered += 1
        else:
            self.dropped += 1
        if link is not None:
            row = self.per_link.setdefault(link, [0, 0, 0])
            row[0] += 1
            row[1 if delivered else 2] += 1


def in_range(a: Cell, b: Cell, cfg: NetConfig,
             cell_pitch_px: float = DEFAULT_CELL_PITCH_PX) -> bool:
    """Euclidean distance between cell centers at or below the radio range."""
    dy = (a[0] - b[0]) * cell_pitch_px
    dx = (a[1] - b[1]) * cell_pitch_px
    return dy * dy + dx * dx <= cfg.range_px * cfg.range_px


def transmit(msg: NetMessage, cfg: NetConfig, rng: random.Random,
             stats: LinkStats, link: tuple[int, int] | None = None) -> bool:
    """One point-to-point delivery attempt; True when it gets through.

    Loss is an independent Bernoulli draw per attempt.  The draw happens
    even at loss 0 so traffic patterns consume the stream identically
    across loss settings.
    """
    delivered = rng.random() >= cfg.loss_prob
    stats.record(link, delivered)
    return delivered


def broadcast_round(positions: Sequence[Cell], messages: Sequence[NetMessage],
                    cfg: NetConfig, rng: random.Random, stats: LinkStats,
                    cell_pitch_px: float = DEFAULT_CELL_PITCH_PX
                    ) -> list[list[NetMessage]]:
    """Simultaneous broadcast: every robot's message is offered to every
    other robot in range.

    Attempts run in (sender, receiver) index order, so inboxes list
    senders ascending and replay is deterministic.  Returns one inbox per
    robot.
    """
    n = len(positions)
    inboxes: list[list[NetMessage]] = [[] for _ in range(n)]
    for i in range(n):
        msg = messages[i]
        for j in range(n):
            if i == j or not in_range(positions[i], positions[j], cfg, cell_pitch_px):
                continue
            if transmit(msg, cfg, rng, stats, link=(i, j)):
                inboxes[j].append(msg)
    return inboxes


def write_stats_csv(rows: Sequence[tuple[int, int, int, int, int]], fh: IO[str]) -> None:
    """Per-tick cumulative traffic snapshots as tick,sent,delivered,dropped,bytes."""
    writer = csv.writer(fh)
    writer.writerow(["tick", "sent", "delivered", "dropped", "bytes"])
    for row in rows:
        writer.writerow(row)
