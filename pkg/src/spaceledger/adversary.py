"""Fault and attack injection: fleet mutations that bypass the client ledger.

Tampering models byzantine, malicious, internal, and external interference
alike; the detector cannot tell provenance apart, only byte effect. Tamper
payloads come from a dedicated seeded stream so campaigns replay exactly.
The client's ledger is never touched.
"""

from __future__ import annotations

from .errors import (
    BoundsError,
    CapacityError,
    CrashedServerError,
    DuplicateBlockError,
    UnknownBlockError,
)
from .storage import (
    DataBlock,
    Fleet,
    SeedStream,
    generate_payload,
    validate_block_id,
)


def crash_server(fleet: Fleet, server_id: str) -> Fleet:
    """Fail a server: its data is lost and it rejects all operations."""
    server = fleet.require(server_id)
    if server.crashed:
        raise CrashedServerError(f"server {server_id!r} is already crashed")
    server.crashed = True
    server.wipe()
    return fleet


class Adversary:
    """Attack driver with its own deterministic payload seed stream."""

    def __init__(self, seed: int = 0):
        self._seeds = SeedStream(seed)

    def _healthy(self, fleet: Fleet, server_id: str):
        server = fleet.require(server_id)
        if server.crashed:
            raise CrashedServerError(f"server {server_id!r} is crashed")
        return server

    def tamper_modify(
        self, fleet: Fleet, server_id: str, block_id: str, size_delta: int
    ) -> Fleet:
        """Rewrite a block, resizing it by `size_delta` bytes.

        A zero delta is the same-weight substitution: content changes, size
        does not, and size-only auditing stays blind to it.
        """
        server = self._healthy(fleet, server_id)
        if block_id not in server.blocks:
            raise UnknownBlockError(f"block {block_id!r} not on {server_id!r}")
        old = server.blocks[block_id]
        new_size = old.size + size_delta
        if new_size < 1:
            raise BoundsError(
                f"modify by {size_delta} would shrink block {block_id!r} "
                f"to {new_size} bytes"
            )
        new_used = server.used - old.size + new_size
        if new_used > server.capacity:
            raise CapacityError(
                f"modify by {size_delta} would use {new_used} of "
                f"{server.capacity} on {server_id!r}"
            )
        payload = generate_payload(self._seeds.next_seed(), new_size)
        server.swap_block(DataBlock(block_id=block_id, payload=payload))
        return fleet

    def tamper_add(
        self, fleet: Fleet, server_id: str, block_id: str, size: int
    ) -> Fleet:
        """Plant a block the client never asked for."""
        validate_block_id(block_id)
        server = self._healthy(fleet, server_id)
        if size < 1:
            raise BoundsError(f"block size must be >= 1, got {size}")
        if block_id in server.blocks:
            raise DuplicateBlockError(f"block {block_id!r} already on {server_id!r}")
        if server.used + size > server.capacity:
            raise CapacityError(
                f"add of {size} bytes does not fit: used {server.used} of "
                f"{server.capacity} on {server_id!r}"
            )
        payload = generate_payload(self._seeds.next_seed(), size)
        server.put_block(DataBlock(block_id=block_id, payload=payload))
        return fleet

    def tamper_remove(self, fleet: Fleet, server_id: str, block_id: str) -> Fleet:
        """Silently drop a stored block."""
        server = self._healthy(fleet, server_id)
        if block_id not in server.blocks:
            raise UnknownBlockError(f"block {block_id!r} not on {server_id!r}")
        server.drop_block(block_id)
        return fleet
