"""Restore points: fleet-wide snapshots keyed by logical tick.

Snapshots are provider-held ground truth. Recovery replaces one server's
state wholesale from the chosen point and reconciles the client ledger so
post-recovery checks do not raise false alarms.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .errors import MonotonicityError, UnrecoverableError
from .ledger import ClientLedger, OperationRecord
from .storage import DataBlock, Fleet


@dataclass(frozen=True)
class ServerSnapshot:
    """Deep copy of one server at snapshot time; crash flag is not retained."""

    server_id: str
    capacity: int
    blocks: Mapping[str, DataBlock]

    def sizes(self) -> dict[str, int]:
        return {bid: b.size for bid, b in self.blocks.items()}

    def state_tuple(self) -> tuple:
        rows = tuple((bid, self.blocks[bid].payload) for bid in sorted(self.blocks))
        return (self.server_id, self.capacity, False, rows)


@dataclass(frozen=True)
class RestorePoint:
    tick: int
    servers: tuple[ServerSnapshot, ...]

    def snapshot_for(self, server_id: str) -> ServerSnapshot:
        for snap in self.servers:
            if snap.server_id == server_id:
                return snap
        raise UnrecoverableError(
            f"restore point at tick {self.tick} holds no server {server_id!r}"
        )


class RestoreStore:
    """Append-only, tick-ordered collection of restore points."""

    def __init__(self):
        self._points: list[RestorePoint] = []
        self._ticks: list[int] = []

    def __len__(self) -> int:
        return len(self._points)

    @property
    def points(self) -> tuple[RestorePoint, ...]:
        return tuple(self._points)

    def last_tick(self) -> int | None:
        return self._ticks[-1] if self._ticks else None

    def append(self, point: RestorePoint) -> None:
        last = self.last_tick()
        if last is not None and point.tick <= last:
            raise MonotonicityError(
                f"restore point tick {point.tick} not after {last}"
            )
        self._points.append(point)
        self._ticks.append(point.tick)


def create_restore_point(store: RestoreStore, fleet: Fleet, tick: int) -> RestorePoint:
    """Snapshot every server at `tick` and append the point to the store.

    Block payloads are immutable, so the copy shares them; later fleet
    mutations replace table entries and never touch the snapshot.
    """
    servers = tuple(
        ServerSnapshot(
            server_id=s.server_id,
            capacity=s.capacity,
            blocks=MappingProxyType(dict(s.blocks)),
        )
        for s in fleet.servers
    )
    point = RestorePoint(tick=tick, servers=servers)
    store.append(point)
    return point


def find_restore_point(store: RestoreStore, at_tick: int) -> RestorePoint | None:
    """Return the point with the greatest tick <= at_tick, or None."""
    idx = bisect.bisect_right(store._ticks, at_tick)
    if idx == 0:
        return None
    return store._points[idx - 1]


@dataclass(frozen=True)
class RecoveryNote:
    """What a recovery did: the target tick and the ledger ops written off."""

    server_id: str
    restored_tick: int
    lost_ops: tuple[OperationRecord, ...]

    def format(self) -> str:
        return (
            f"RECOVER server={self.server_id} to_tick={self.restored_tick} "
            f"lost_ops={len(self.lost_ops)}"
        )


def recover(
    store: RestoreStore,
    fleet: Fleet,
    ledger: ClientLedger,
    server_id: str,
    at_tick: int | None = None,
) -> RecoveryNote:
    """Roll one server back to a restore point and reconcile the ledger.

    Picks the point with the greatest tick <= at_tick (the latest point when
    at_tick is None). The server's capacity, block table, and payload bytes
    are replaced by the snapshot and its crash flag cleared. Ledger entries
    for that server newer than the point are struck as lost.
    """
    server = fleet.require(server_id)
    if at_tick is None:
        last = store.last_tick()
        if last is None:
            raise UnrecoverableError("no restore point exists")
        point = find_restore_point(store, last)
    else:
        point = find_restore_point(store, at_tick)
    if point is None:
        raise UnrecoverableError(f"no restore point at or before tick {at_tick}")
    snap = point.snapshot_for(server_id)
    server.load_state(snap.capacity, dict(snap.blocks))
    lost = ledger.reconcile_recovery(
        server_id=server_id,
        capacity=snap.capacity,
        sizes=snap.sizes(),
        to_tick=point.tick,
    )
    return RecoveryNote(server_id=server_id, restored_tick=point.tick, lost_ops=lost)
