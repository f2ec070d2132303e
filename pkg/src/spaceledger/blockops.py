"""Client data operations: append, delete, update.

Each operation validates every precondition before touching anything, then
commits ledger-first: ``ledger.record`` rejects any record inconsistent with
the client's expectations before the fleet is mutated, so an error outcome
leaves both sides byte-for-byte unchanged. Successful operations consume
exactly one tick and, when a restore store is supplied, snapshot the fleet at
that tick.
"""

from __future__ import annotations

from dataclasses import dataclass

from .accounting import IntegrityReport, compare_spaces
from .errors import (
    BoundsError,
    CapacityError,
    CrashedServerError,
    DuplicateBlockError,
    EmptyServerError,
    MonotonicityError,
    UnknownBlockError,
    UnknownServerError,
)
from .ledger import ClientLedger, OperationRecord, OpKind
from .restore import RestoreStore, create_restore_point
from .storage import DataBlock, Fleet, ServerState, generate_payload, validate_block_id


@dataclass(frozen=True)
class OpOutcome:
    record: OperationRecord
    pre_check: IntegrityReport | None
    restore_point_tick: int | None


def _healthy_server(fleet: Fleet, ledger: ClientLedger, server_id: str) -> ServerState:
    server = fleet.require(server_id)
    if not ledger.has_server(server_id):
        raise UnknownServerError(f"server {server_id!r} was never allocated")
    if server.crashed:
        raise CrashedServerError(f"server {server_id!r} is crashed")
    return server


def _guard_snapshot_tick(restore_store: RestoreStore | None, tick: int) -> None:
    if restore_store is not None:
        last = restore_store.last_tick()
        if last is not None and tick <= last:
            raise MonotonicityError(
                f"restore store already holds tick {last}; cannot snapshot {tick}"
            )


def _snapshot(
    restore_store: RestoreStore | None, fleet: Fleet, tick: int
) -> int | None:
    if restore_store is None:
        return None
    create_restore_point(restore_store, fleet, tick)
    return tick


def append_block(
    ledger: ClientLedger,
    fleet: Fleet,
    server_id: str,
    block_id: str,
    size: int,
    seed: int,
    restore_store: RestoreStore | None = None,
    pre_check: bool = False,
) -> OpOutcome:
    """Store a new deterministic block of `size` bytes on one server."""
    validate_block_id(block_id)
    server = _healthy_server(fleet, ledger, server_id)
    if size < 1:
        raise BoundsError(f"block size must be >= 1, got {size}")
    if block_id in server.blocks:
        raise DuplicateBlockError(f"block {block_id!r} already on {server_id!r}")
    pre_used = server.used
    if pre_used + size > server.capacity:
        raise CapacityError(
            f"append of {size} bytes does not fit: used {pre_used} of "
            f"{server.capacity} on {server_id!r}"
        )
    record = OperationRecord(
        tick=ledger.current_tick + 1,
        kind=OpKind.APPEND,
        server_id=server_id,
        block_id=block_id,
        size_delta=size,
        pre_used=pre_used,
        post_used=pre_used + size,
    )
    _guard_snapshot_tick(restore_store, record.tick)
    check = compare_spaces(ledger, fleet) if pre_check else None
    block = DataBlock(block_id=block_id, payload=generate_payload(seed, size))
    ledger.record(record)
    server.put_block(block)
    tick = _snapshot(restore_store, fleet, record.tick)
    return OpOutcome(record=record, pre_check=check, restore_point_tick=tick)


def delete_block(
    ledger: ClientLedger,
    fleet: Fleet,
    server_id: str,
    block_id: str,
    restore_store: RestoreStore | None = None,
    pre_check: bool = False,
) -> OpOutcome:
    """Remove a block. Guarded: an empty server has nothing to delete."""
    server = _healthy_server(fleet, ledger, server_id)
    if not server.blocks:
        raise EmptyServerError(f"server {server_id!r} is empty; nothing to delete")
    if block_id not in server.blocks:
        raise UnknownBlockError(f"block {block_id!r} not on {server_id!r}")
    pre_used = server.used
    size = server.blocks[block_id].size
    record = OperationRecord(
        tick=ledger.current_tick + 1,
        kind=OpKind.DELETE,
        server_id=server_id,
        block_id=block_id,
        size_delta=-size,
        pre_used=pre_used,
        post_used=pre_used - size,
    )
    _guard_snapshot_tick(restore_store, record.tick)
    check = compare_spaces(ledger, fleet) if pre_check else None
    ledger.record(record)
    server.drop_block(block_id)
    tick = _snapshot(restore_store, fleet, record.tick)
    return OpOutcome(record=record, pre_check=check, restore_point_tick=tick)


def update_block(
    ledger: ClientLedger,
    fleet: Fleet,
    server_id: str,
    block_id: str,
    new_size: int,
    seed: int,
    restore_store: RestoreStore | None = None,
    pre_check: bool = False,
) -> OpOutcome:
    """Replace a block's payload, growing or shrinking it to `new_size`.

    A same-size update is legal and logged with delta zero; only content
    changes, which size accounting cannot see.
    """
    server = _healthy_server(fleet, ledger, server_id)
    if new_size < 1:
        raise BoundsError(f"block size must be >= 1, got {new_size}")
    if block_id not in server.blocks:
        raise UnknownBlockError(f"block {block_id!r} not on {server_id!r}")
    old_size = server.blocks[block_id].size
    pre_used = server.used
    post_used = pre_used - old_size + new_size
    if post_used > server.capacity:
        raise CapacityError(
            f"update to {new_size} bytes does not fit: would use {post_used} of "
            f"{server.capacity} on {server_id!r}"
        )
    record = OperationRecord(
        tick=ledger.current_tick + 1,
        kind=OpKind.UPDATE,
        server_id=server_id,
        block_id=block_id,
        size_delta=new_size - old_size,
        pre_used=pre_used,
        post_used=post_used,
    )
    _guard_snapshot_tick(restore_store, record.tick)
    check = compare_spaces(ledger, fleet) if pre_check else None
    block = DataBlock(block_id=block_id, payload=generate_payload(seed, new_size))
    ledger.record(record)
    server.swap_block(block)
    tick = _snapshot(restore_store, fleet, record.tick)
    return OpOutcome(record=record, pre_check=check, restore_point_tick=tick)
