"""Space comparison: ledger-expected versus server-actual occupancy.

A server is flagged the moment its measured byte count differs from what the
client's ledger says it should hold. Content is never inspected, so two
different payloads of equal size are indistinguishable here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ConfigurationError, CrashedServerError
from .ledger import ClientLedger
from .storage import Fleet, server_measure


class Verdict(enum.Enum):
    CONSISTENT = "CONSISTENT"
    VIOLATION = "VIOLATION"
    UNAVAILABLE = "UNAVAILABLE"


@dataclass(frozen=True)
class ReportRow:
    """Comparison outcome for one server; actual_used is None when crashed."""

    server_id: str
    expected_used: int
    actual_used: int | None
    verdict: Verdict


@dataclass(frozen=True)
class IntegrityReport:
    tick: int
    rows: tuple[ReportRow, ...]

    @property
    def violation_count(self) -> int:
        return sum(1 for r in self.rows if r.verdict is Verdict.VIOLATION)

    @property
    def summary(self) -> Verdict:
        if any(r.verdict is Verdict.VIOLATION for r in self.rows):
            return Verdict.VIOLATION
        if any(r.verdict is Verdict.UNAVAILABLE for r in self.rows):
            return Verdict.UNAVAILABLE
        return Verdict.CONSISTENT

    def row_for(self, server_id: str) -> ReportRow:
        for row in self.rows:
            if row.server_id == server_id:
                return row
        raise KeyError(server_id)


def _row(server, expected: int) -> ReportRow:
    try:
        actual = server_measure(server).used
    except CrashedServerError:
        return ReportRow(server.server_id, expected, None, Verdict.UNAVAILABLE)
    verdict = Verdict.CONSISTENT if actual == expected else Verdict.VIOLATION
    return ReportRow(server.server_id, expected, actual, verdict)


def _check_server_sets(ledger: ClientLedger, fleet: Fleet) -> None:
    missing = [sid for sid in ledger.server_ids() if not fleet.has_server(sid)]
    if missing:
        raise ConfigurationError(
            f"ledger servers missing from fleet: {', '.join(missing)}"
        )


def compare_spaces(ledger: ClientLedger, fleet: Fleet) -> IntegrityReport:
    """Compare expected and actual used space on every fleet server.

    Servers the ledger has never allocated are expected to hold zero bytes.
    Pure: neither input changes, and repeated calls return equal reports.
    """
    _check_server_sets(ledger, fleet)
    rows = []
    for server in fleet.servers:
        sid = server.server_id
        expected = ledger.expected_used(sid) if ledger.has_server(sid) else 0
        rows.append(_row(server, expected))
    return IntegrityReport(tick=ledger.current_tick, rows=tuple(rows))


def check_initial_allocation(ledger: ClientLedger, fleet: Fleet) -> IntegrityReport:
    """Verify every server reads empty, as required before the first data op.

    Expected used space is pinned to zero for all servers; any pre-planted
    byte shows up as a violation.
    """
    _check_server_sets(ledger, fleet)
    rows = [_row(server, 0) for server in fleet.servers]
    return IntegrityReport(tick=ledger.current_tick, rows=tuple(rows))


def format_report(report: IntegrityReport, header: str = "CHECK") -> str:
    """Render a report block; one line per server plus a summary line."""
    lines = [f"{header} tick={report.tick}"]
    for row in report.rows:
        actual = "NA" if row.actual_used is None else str(row.actual_used)
        lines.append(
            f"server {row.server_id} expected={row.expected_used} "
            f"actual={actual} verdict={row.verdict.value}"
        )
    lines.append(
        f"SUMMARY verdict={report.summary.value} violations={report.violation_count}"
    )
    return "\n".join(lines) + "\n"
