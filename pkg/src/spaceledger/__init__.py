"""Size-only integrity auditing for simulated multi-server storage.

A client ledger tracks expected per-server byte occupancy, a comparison pass
flags any size-changing tampering, and tick-stamped restore points bring
servers back after crashes or detected corruption.
"""

from . import errors
from .accounting import (
    IntegrityReport,
    ReportRow,
    Verdict,
    check_initial_allocation,
    compare_spaces,
    format_report,
)
from .adversary import Adversary, crash_server
from .audit import AuditGrant, LedgerPublicView, public_view, tpa_audit
from .blockops import OpOutcome, append_block, delete_block, update_block
from .cli import (
    RunOptions,
    RunReport,
    ScenarioCommand,
    format_scenario,
    main,
    parse_scenario,
    run_scenario,
)
from .ledger import (
    ClientLedger,
    OperationRecord,
    OpKind,
    ledger_load,
    ledger_save,
    replay_oracle,
)
from .restore import (
    RecoveryNote,
    RestorePoint,
    RestoreStore,
    ServerSnapshot,
    create_restore_point,
    find_restore_point,
    recover,
)
from .storage import (
    DataBlock,
    Fleet,
    SeedStream,
    ServerState,
    SpaceMeasurement,
    allocate,
    create_fleet,
    generate_payload,
    server_measure,
)

__all__ = [
    "Adversary",
    "AuditGrant",
    "ClientLedger",
    "DataBlock",
    "Fleet",
    "IntegrityReport",
    "LedgerPublicView",
    "OpKind",
    "OpOutcome",
    "OperationRecord",
    "RecoveryNote",
    "ReportRow",
    "RestorePoint",
    "RestoreStore",
    "RunOptions",
    "RunReport",
    "ScenarioCommand",
    "SeedStream",
    "ServerSnapshot",
    "ServerState",
    "SpaceMeasurement",
    "Verdict",
    "allocate",
    "append_block",
    "check_initial_allocation",
    "compare_spaces",
    "crash_server",
    "create_fleet",
    "create_restore_point",
    "delete_block",
    "errors",
    "find_restore_point",
    "format_report",
    "format_scenario",
    "generate_payload",
    "ledger_load",
    "ledger_save",
    "main",
    "parse_scenario",
    "public_view",
    "recover",
    "replay_oracle",
    "run_scenario",
    "server_measure",
    "tpa_audit",
    "update_block",
]
