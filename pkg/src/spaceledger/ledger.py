"""Client-side space ledger: expected sizes per server plus a tick-stamped log.

The ledger never sees payload bytes. It records, per server, the capacity the
provider granted and the sizes the client believes are stored, together with
an append-only operation log in logical time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import (
    AllocationError,
    BoundsError,
    CapacityError,
    DuplicateBlockError,
    LedgerFormatError,
    MonotonicityError,
    RecordError,
    UnknownBlockError,
    UnknownServerError,
)
from .storage import validate_block_id, validate_server_id

LEDGER_HEADER = "SPACELEDGER v1"

# Block-id stand-in on ALLOCATE records, which concern no block.
NO_BLOCK = "-"


class OpKind(enum.Enum):
    APPEND = "APPEND"
    DELETE = "DELETE"
    UPDATE = "UPDATE"
    ALLOCATE = "ALLOCATE"


@dataclass(frozen=True)
class OperationRecord:
    """One logged client operation; pre/post are expected used space in bytes."""

    tick: int
    kind: OpKind
    server_id: str
    block_id: str
    size_delta: int
    pre_used: int
    post_used: int

    def __post_init__(self):
        validate_server_id(self.server_id)
        validate_block_id(self.block_id)
        if self.tick < 0:
            raise RecordError(f"tick must be non-negative, got {self.tick}")
        if self.pre_used < 0 or self.post_used < 0:
            raise RecordError("pre/post used space cannot be negative")
        if self.post_used - self.pre_used != self.size_delta:
            raise RecordError(
                f"size_delta {self.size_delta} does not match "
                f"post-pre {self.post_used - self.pre_used}"
            )
        if self.kind is OpKind.APPEND and self.size_delta < 1:
            raise RecordError("APPEND needs a positive size_delta")
        if self.kind is OpKind.DELETE and self.size_delta > -1:
            raise RecordError("DELETE needs a negative size_delta")
        if self.kind is OpKind.ALLOCATE and self.size_delta != 0:
            raise RecordError("ALLOCATE carries no size change")


@dataclass
class _Account:
    """Per-server ledger state: capacity and expected block sizes."""

    capacity: int = 0
    expected: dict[str, int] = field(default_factory=dict)
    used: int = 0


class ClientLedger:
    """The client's record of what the fleet should contain. No payloads."""

    def __init__(self):
        self._accounts: dict[str, _Account] = {}
        self.log: list[OperationRecord] = []
        self.current_tick = 0

    # -- queries ------------------------------------------------------------

    def server_ids(self) -> list[str]:
        return sorted(self._accounts)

    def has_server(self, server_id: str) -> bool:
        return server_id in self._accounts

    def _require(self, server_id: str) -> _Account:
        try:
            return self._accounts[server_id]
        except KeyError:
            raise UnknownServerError(f"server {server_id!r} not in ledger") from None

    def capacity_of(self, server_id: str) -> int:
        return self._require(server_id).capacity

    def expected_used(self, server_id: str) -> int:
        """Total bytes the client expects on one server."""
        return self._require(server_id).used

    def expected_blocks(self, server_id: str) -> dict[str, int]:
        """Copy of the expected block-size table for one server."""
        return dict(self._require(server_id).expected)

    def expected_size(self, server_id: str, block_id: str) -> int:
        acct = self._require(server_id)
        try:
            return acct.expected[block_id]
        except KeyError:
            raise UnknownBlockError(
                f"block {block_id!r} not in ledger for {server_id!r}"
            ) from None

    # -- mutation -----------------------------------------------------------

    def allocate(self, server_id: str, capacity: int) -> OperationRecord:
        """Register or re-register a server's capacity and log the event.

        Reallocation is forbidden while the ledger still expects blocks there.
        """
        validate_server_id(server_id)
        if capacity < 1:
            raise BoundsError(f"capacity must be >= 1, got {capacity}")
        acct = self._accounts.get(server_id)
        if acct is not None and acct.expected:
            raise AllocationError(
                f"ledger still expects data on {server_id!r}; cannot reallocate"
            )
        record = OperationRecord(
            tick=self.current_tick + 1,
            kind=OpKind.ALLOCATE,
            server_id=server_id,
            block_id=NO_BLOCK,
            size_delta=0,
            pre_used=0,
            post_used=0,
        )
        if acct is None:
            self._accounts[server_id] = _Account(capacity=capacity)
        else:
            acct.capacity = capacity
        self.log.append(record)
        self.current_tick = record.tick
        return record

    def record(self, record: OperationRecord) -> None:
        """Validate and apply one operation record.

        The record's tick must advance logical time, its arithmetic must be
        consistent with the current expected state, and the result must fit
        the server's capacity. On any error the ledger is unchanged.
        """
        if record.tick <= self.current_tick:
            raise MonotonicityError(
                f"tick {record.tick} does not advance past {self.current_tick}"
            )
        acct = self._require(record.server_id)
        if record.pre_used != acct.used:
            raise RecordError(
                f"record pre_used {record.pre_used} disagrees with "
                f"ledger expected {acct.used}"
            )
        kind = record.kind
        if kind is OpKind.APPEND:
            if record.block_id in acct.expected:
                raise DuplicateBlockError(
                    f"block {record.block_id!r} already ledgered on {record.server_id!r}"
                )
            if record.post_used > acct.capacity:
                raise CapacityError(
                    f"{record.post_used} bytes exceed capacity {acct.capacity} "
                    f"on {record.server_id!r}"
                )
            acct.expected[record.block_id] = record.size_delta
        elif kind is OpKind.DELETE:
            old = self.expected_size(record.server_id, record.block_id)
            if record.size_delta != -old:
                raise RecordError(
                    f"DELETE delta {record.size_delta} does not match "
                    f"ledgered size {old}"
                )
            del acct.expected[record.block_id]
        elif kind is OpKind.UPDATE:
            old = self.expected_size(record.server_id, record.block_id)
            new = old + record.size_delta
            if new < 1:
                raise RecordError(
                    f"UPDATE would shrink block {record.block_id!r} to {new} bytes"
                )
            if record.post_used > acct.capacity:
                raise CapacityError(
                    f"{record.post_used} bytes exceed capacity {acct.capacity} "
                    f"on {record.server_id!r}"
                )
            acct.expected[record.block_id] = new
        elif kind is OpKind.ALLOCATE:
            if acct.expected:
                raise AllocationError(
                    f"ALLOCATE recorded against non-empty {record.server_id!r}"
                )
        else:  # pragma: no cover - enum is closed
            raise RecordError(f"unknown kind {kind!r}")
        acct.used += record.size_delta
        self.log.append(record)
        self.current_tick = record.tick

    def advance_tick(self) -> int:
        """Consume one tick without logging an operation (manual snapshots)."""
        self.current_tick += 1
        return self.current_tick

    def reconcile_recovery(
        self,
        server_id: str,
        capacity: int,
        sizes: dict[str, int],
        to_tick: int,
    ) -> tuple[OperationRecord, ...]:
        """Reset one server's expectations to a restored snapshot.

        Log entries for that server newer than `to_tick` are struck as lost
        and returned. `current_tick` keeps its high-water value so future
        ticks never collide with other servers' records.
        """
        lost = tuple(
            r for r in self.log if r.server_id == server_id and r.tick > to_tick
        )
        if lost:
            dropped = set(id(r) for r in lost)
            self.log = [r for r in self.log if id(r) not in dropped]
        acct = self._accounts.get(server_id)
        if acct is None:
            acct = _Account()
            self._accounts[server_id] = acct
        acct.capacity = capacity
        acct.expected = dict(sizes)
        acct.used = sum(sizes.values())
        return lost

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClientLedger):
            return NotImplemented
        return (
            self._accounts == other._accounts
            and self.log == other.log
            and self.current_tick == other.current_tick
        )

    def __repr__(self) -> str:
        return (
            f"ClientLedger(servers={len(self._accounts)}, ops={len(self.log)}, "
            f"tick={self.current_tick})"
        )


def replay_oracle(log: list[OperationRecord]) -> dict[str, int]:
    """Recompute expected used space per server by folding the log from empty.

    Ignores ledger tables entirely; this is the independent ground truth the
    incremental ledger is checked against.
    """
    last_tick = -1
    out: dict[str, int] = {}
    for record in log:
        if record.tick <= last_tick:
            raise MonotonicityError(
                f"log tick {record.tick} not strictly after {last_tick}"
            )
        last_tick = record.tick
        out[record.server_id] = out.get(record.server_id, 0) + record.size_delta
    return out


def ledger_save(ledger: ClientLedger) -> str:
    """Serialize a ledger to its line-based text form (UTF-8, LF, bit-exact)."""
    lines = [LEDGER_HEADER, f"tick {ledger.current_tick}"]
    for sid in sorted(ledger._accounts):
        lines.append(f"server {sid} capacity {ledger._accounts[sid].capacity}")
    for sid in sorted(ledger._accounts):
        expected = ledger._accounts[sid].expected
        for bid in sorted(expected):
            lines.append(f"block {sid} {bid} {expected[bid]}")
    for r in ledger.log:
        lines.append(
            f"op {r.tick} {r.kind.value} {r.server_id} {r.block_id} "
            f"{r.size_delta} {r.pre_used} {r.post_used}"
        )
    return "\n".join(lines) + "\n"


def _parse_int(token: str, line_no: int, what: str, signed: bool = False) -> int:
    body = token
    if signed and token and token[0] in "+-":
        body = token[1:]
    if not (body.isascii() and body.isdigit()):
        raise LedgerFormatError(line_no, f"{what} is not a valid integer: {token!r}")
    return int(token)


def ledger_load(text: str) -> ClientLedger:
    """Parse a stream produced by ledger_save. Inverse of ledger_save."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LedgerFormatError(1, "empty stream")
    if lines[0] != LEDGER_HEADER:
        raise LedgerFormatError(1, f"bad header {lines[0]!r}; want {LEDGER_HEADER!r}")
    if len(lines) < 2:
        raise LedgerFormatError(2, "truncated stream: missing tick line")

    ledger = ClientLedger()
    tick_fields = lines[1].split(" ")
    if len(tick_fields) != 2 or tick_fields[0] != "tick":
        raise LedgerFormatError(2, f"expected 'tick <n>', got {lines[1]!r}")
    ledger.current_tick = _parse_int(tick_fields[1], 2, "tick")

    section = "server"
    last_tick = 0
    for idx, line in enumerate(lines[2:], start=3):
        fields = line.split(" ")
        tag = fields[0]
        if tag == "server":
            if section != "server":
                raise LedgerFormatError(idx, "server line after later section")
            if len(fields) != 4 or fields[2] != "capacity":
                raise LedgerFormatError(
                    idx, f"expected 'server <id> capacity <bytes>', got {line!r}"
                )
            sid = fields[1]
            if ledger.has_server(sid):
                raise LedgerFormatError(idx, f"duplicate server {sid!r}")
            cap = _parse_int(fields[3], idx, "capacity")
            try:
                validate_server_id(sid)
            except Exception as exc:
                raise LedgerFormatError(idx, str(exc)) from None
            ledger._accounts[sid] = _Account(capacity=cap)
        elif tag == "block":
            if section == "op":
                raise LedgerFormatError(idx, "block line after op section")
            section = "block"
            if len(fields) != 4:
                raise LedgerFormatError(
                    idx, f"expected 'block <server> <block> <size>', got {line!r}"
                )
            sid, bid = fields[1], fields[2]
            size = _parse_int(fields[3], idx, "block size")
            if not ledger.has_server(sid):
                raise LedgerFormatError(idx, f"block on undeclared server {sid!r}")
            acct = ledger._accounts[sid]
            if bid in acct.expected:
                raise LedgerFormatError(idx, f"duplicate block {sid!r}/{bid!r}")
            if size < 1:
                raise LedgerFormatError(idx, f"block size must be >= 1, got {size}")
            try:
                validate_block_id(bid)
            except Exception as exc:
                raise LedgerFormatError(idx, str(exc)) from None
            acct.expected[bid] = size
            acct.used += size
        elif tag == "op":
            section = "op"
            if len(fields) != 8:
                raise LedgerFormatError(idx, f"expected 8 op fields, got {len(fields)}")
            tick = _parse_int(fields[1], idx, "op tick")
            kind_token = fields[2]
            try:
                kind = OpKind(kind_token)
            except ValueError:
                raise LedgerFormatError(
                    idx, f"unknown op kind {kind_token!r}"
                ) from None
            delta = _parse_int(fields[5], idx, "size_delta", signed=True)
            pre = _parse_int(fields[6], idx, "pre_used")
            post = _parse_int(fields[7], idx, "post_used")
            try:
                record = OperationRecord(
                    tick=tick,
                    kind=kind,
                    server_id=fields[3],
                    block_id=fields[4],
                    size_delta=delta,
                    pre_used=pre,
                    post_used=post,
                )
            except Exception as exc:
                raise LedgerFormatError(idx, str(exc)) from None
            if tick <= last_tick:
                raise LedgerFormatError(
                    idx, f"op tick {tick} not strictly after {last_tick}"
                )
            last_tick = tick
            if not ledger.has_server(record.server_id):
                raise LedgerFormatError(
                    idx, f"op on undeclared server {record.server_id!r}"
                )
            ledger.log.append(record)
        else:
            raise LedgerFormatError(idx, f"malformed line {line!r}")
    if last_tick > ledger.current_tick:
        raise LedgerFormatError(
            2, f"tick {ledger.current_tick} behind last op tick {last_tick}"
        )
    return ledger
