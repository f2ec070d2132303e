"""Third-party audit: content-blind occupancy verification.

The auditor works from a projection of the ledger that structurally cannot
hold payload bytes, plus server-reported measurements. Delegation is the
user's call; without it no audit runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .accounting import IntegrityReport, ReportRow, Verdict
from .errors import ConfigurationError, CrashedServerError, DelegationError
from .ledger import ClientLedger
from .storage import Fleet, server_measure


@dataclass(frozen=True)
class AuditGrant:
    """User delegation: whether auditing is allowed and over which servers."""

    granted: bool
    scope: tuple[str, ...]


@dataclass(frozen=True)
class LedgerPublicView:
    """Size-only ledger projection handed to the auditor.

    Carries nothing but server ids and expected byte totals; payloads cannot
    pass through this type.
    """

    tick: int
    expected: Mapping[str, int]


def public_view(ledger: ClientLedger) -> LedgerPublicView:
    """Project a ledger down to its per-server expected byte totals."""
    expected = {sid: ledger.expected_used(sid) for sid in ledger.server_ids()}
    return LedgerPublicView(tick=ledger.current_tick, expected=MappingProxyType(expected))


def tpa_audit(grant: AuditGrant, view: LedgerPublicView, fleet: Fleet) -> IntegrityReport:
    """Audit the servers in scope using sizes only.

    Row rule matches compare_spaces exactly, restricted to the granted scope;
    rows come out in fleet order.
    """
    if not grant.granted:
        raise DelegationError("audit not delegated by the user")
    unknown = [sid for sid in grant.scope if not fleet.has_server(sid)]
    if unknown:
        raise ConfigurationError(
            f"audit scope outside fleet: {', '.join(sorted(unknown))}"
        )
    in_scope = set(grant.scope)
    rows = []
    for server in fleet.servers:
        if server.server_id not in in_scope:
            continue
        expected = view.expected.get(server.server_id, 0)
        try:
            actual = server_measure(server).used
        except CrashedServerError:
            rows.append(
                ReportRow(server.server_id, expected, None, Verdict.UNAVAILABLE)
            )
            continue
        verdict = Verdict.CONSISTENT if actual == expected else Verdict.VIOLATION
        rows.append(ReportRow(server.server_id, expected, actual, verdict))
    return IntegrityReport(tick=view.tick, rows=tuple(rows))
