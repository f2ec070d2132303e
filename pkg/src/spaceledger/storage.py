"""Simulated multi-server storage: servers, blocks, and space measurement.

Servers hold uniquely named blocks under a provider-allocated byte capacity.
Payload bytes are produced by a deterministic generator so that any scenario
replays bit-identically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllocationError,
    BoundsError,
    CrashedServerError,
    TokenError,
    UnknownServerError,
)

MAX_FLEET_SIZE = 1024

_BLOCK_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
_SERVER_ID_RE = re.compile(r"^s(0|[1-9][0-9]*)$")

# 64-bit linear congruential recurrence behind generate_payload.
_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_MASK64 = (1 << 64) - 1
_CHUNK = 1 << 16


def validate_block_id(block_id: str) -> str:
    if not isinstance(block_id, str) or not _BLOCK_ID_RE.match(block_id):
        raise TokenError(
            f"bad block id {block_id!r}: need 1-64 chars of [A-Za-z0-9_-]"
        )
    return block_id


def validate_server_id(server_id: str) -> str:
    if not isinstance(server_id, str) or not _SERVER_ID_RE.match(server_id):
        raise TokenError(f"bad server id {server_id!r}: need form s<k>")
    return server_id


@dataclass(frozen=True)
class DataBlock:
    """One stored unit: identifier plus its payload bytes.

    Instances are immutable; a resize or rewrite produces a new block, which
    lets snapshots share payloads safely.
    """

    block_id: str
    payload: bytes

    def __post_init__(self):
        validate_block_id(self.block_id)
        if len(self.payload) < 1:
            raise BoundsError(f"block {self.block_id!r}: zero-size blocks are rejected")

    @property
    def size(self) -> int:
        return len(self.payload)


@dataclass(frozen=True)
class SpaceMeasurement:
    """Raw occupancy reading for one server; used + free = capacity."""

    server_id: str
    used: int
    free: int
    capacity: int


class ServerState:
    """One simulated cloud server: capacity, block table, crash flag.

    Used space is tracked incrementally; mutation goes through the put/drop/
    swap methods so the counter stays in step with the block table.
    """

    def __init__(self, server_id: str, capacity: int = 0):
        self.server_id = validate_server_id(server_id)
        self.capacity = capacity
        self.blocks: dict[str, DataBlock] = {}
        self.crashed = False
        self._used = 0

    @property
    def used(self) -> int:
        return self._used

    def put_block(self, block: DataBlock) -> None:
        assert block.block_id not in self.blocks
        self.blocks[block.block_id] = block
        self._used += block.size

    def drop_block(self, block_id: str) -> DataBlock:
        block = self.blocks.pop(block_id)
        self._used -= block.size
        return block

    def swap_block(self, block: DataBlock) -> DataBlock:
        old = self.blocks[block.block_id]
        self.blocks[block.block_id] = block
        self._used += block.size - old.size
        return old

    def wipe(self) -> None:
        self.blocks.clear()
        self._used = 0

    def load_state(self, capacity: int, blocks: dict[str, DataBlock]) -> None:
        """Replace the full server state; used by crash recovery."""
        self.capacity = capacity
        self.blocks = dict(blocks)
        self.crashed = False
        self._used = sum(b.size for b in blocks.values())

    def state_tuple(self) -> tuple:
        """Canonical deep state, payload bytes included; for exact comparison."""
        rows = tuple((bid, self.blocks[bid].payload) for bid in sorted(self.blocks))
        return (self.server_id, self.capacity, self.crashed, rows)

    def __repr__(self) -> str:
        return (
            f"ServerState({self.server_id!r}, capacity={self.capacity}, "
            f"used={self._used}, blocks={len(self.blocks)}, crashed={self.crashed})"
        )


class Fleet:
    """Ordered collection of servers s0..s{count-1}."""

    def __init__(self, servers: list[ServerState]):
        self.servers = servers
        self._by_id = {s.server_id: s for s in servers}

    @property
    def count(self) -> int:
        return len(self.servers)

    def server_ids(self) -> list[str]:
        return [s.server_id for s in self.servers]

    def has_server(self, server_id: str) -> bool:
        return server_id in self._by_id

    def require(self, server_id: str) -> ServerState:
        try:
            return self._by_id[server_id]
        except KeyError:
            raise UnknownServerError(f"unknown server {server_id!r}") from None

    def state_tuple(self) -> tuple:
        return tuple(s.state_tuple() for s in self.servers)

    def __repr__(self) -> str:
        return f"Fleet(count={self.count})"


def create_fleet(count: int) -> Fleet:
    """Create `count` servers named s0..s{count-1}, unallocated and healthy."""
    if not isinstance(count, int) or not 1 <= count <= MAX_FLEET_SIZE:
        raise BoundsError(f"fleet size {count} outside 1..{MAX_FLEET_SIZE}")
    return Fleet([ServerState(f"s{i}") for i in range(count)])


def allocate(fleet: Fleet, server_id: str, capacity: int) -> Fleet:
    """Set a server's provider-allocated capacity.

    Only an empty server may be (re)allocated; occupied servers keep their
    capacity until cleared.
    """
    server = fleet.require(server_id)
    if server.crashed:
        raise CrashedServerError(f"server {server_id!r} is crashed")
    if server.blocks:
        raise AllocationError(f"server {server_id!r} is not empty; cannot reallocate")
    if capacity < 1:
        raise BoundsError(f"capacity must be >= 1, got {capacity}")
    server.capacity = capacity
    return fleet


def server_measure(server: ServerState) -> SpaceMeasurement:
    """Read used/free space off one server. Fails if the server is crashed."""
    if server.crashed:
        raise CrashedServerError(
            f"server {server.server_id!r} is crashed; measurement unavailable"
        )
    used = server.used
    return SpaceMeasurement(
        server_id=server.server_id,
        used=used,
        free=server.capacity - used,
        capacity=server.capacity,
    )


# Jump tables for the recurrence x_{j+1} = (A*x_j + C) mod 2^64:
# _JUMP_MULT[k] = A^k and _JUMP_INC[k] = (A^{k-1} + ... + A + 1)*C, so that
# x_{j+k} = _JUMP_MULT[k]*x_j + _JUMP_INC[k] (mod 2^64).
_JUMP_MULT: np.ndarray | None = None
_JUMP_INC: np.ndarray | None = None


def _jump_tables() -> tuple[np.ndarray, np.ndarray]:
    global _JUMP_MULT, _JUMP_INC
    if _JUMP_MULT is None:
        mult = [1] * (_CHUNK + 1)
        inc = [0] * (_CHUNK + 1)
        for k in range(_CHUNK):
            mult[k + 1] = (mult[k] * _LCG_MULT) & _MASK64
            inc[k + 1] = (inc[k] * _LCG_MULT + _LCG_INC) & _MASK64
        _JUMP_MULT = np.array(mult, dtype=np.uint64)
        _JUMP_INC = np.array(inc, dtype=np.uint64)
    return _JUMP_MULT, _JUMP_INC


def generate_payload(seed: int, size: int) -> bytes:
    """Deterministic payload bytes for (seed, size), bit-exact everywhere.

    Byte k is the top byte of x_{k+1} where x_0 = seed and
    x_{j+1} = (6364136223846793005*x_j + 1442695040888963407) mod 2^64.
    """
    if not 0 <= seed <= _MASK64:
        raise BoundsError(f"seed {seed} outside unsigned 64-bit range")
    if size < 1:
        raise BoundsError(f"payload size must be >= 1, got {size}")
    mult, inc = _jump_tables()
    chunks = []
    state = seed
    remaining = size
    while remaining > 0:
        m = min(_CHUNK, remaining)
        xs = mult[1 : m + 1] * np.uint64(state) + inc[1 : m + 1]
        chunks.append((xs >> np.uint64(56)).astype(np.uint8).tobytes())
        state = int(xs[-1])
        remaining -= m
    return b"".join(chunks)


class SeedStream:
    """Deterministic stream of 64-bit seeds, itself driven by the recurrence."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise BoundsError(f"seed {seed} outside unsigned 64-bit range")
        self._state = seed

    def next_seed(self) -> int:
        self._state = (self._state * _LCG_MULT + _LCG_INC) & _MASK64
        return self._state
