"""Scenario runner: line-oriented command files driven deterministically.

Grammar (one command per line, `#` starts a comment):

    fleet <count>
    allocate <server> <capacity-bytes>
    append <server> <block-id> <size-bytes> [seed=<u64>]
    delete <server> <block-id>
    update <server> <block-id> <new-size-bytes> [seed=<u64>]
    check
    audit [<server> ...]
    restorepoint
    tamper modify <server> <block-id> <signed-delta>
    tamper add <server> <block-id> <size-bytes>
    tamper remove <server> <block-id>
    crash <server>
    recover <server> [at=<tick>]

Exit codes: 0 all checks consistent, 1 usage or parse error, 2 violation
detected, 3 unrecoverable failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import blockops
from .accounting import (
    IntegrityReport,
    Verdict,
    compare_spaces,
    format_report,
)
from .adversary import Adversary, crash_server
from .audit import AuditGrant, public_view, tpa_audit
from .errors import (
    ConfigurationError,
    ScenarioParseError,
    SpaceLedgerError,
    UsageError,
)
from .ledger import ClientLedger, ledger_save
from .restore import RestoreStore, create_restore_point, recover
from .storage import (
    Fleet,
    SeedStream,
    allocate,
    create_fleet,
    validate_block_id,
    validate_server_id,
)

# Decorrelates the adversary's payload stream from the client's.
_ADVERSARY_SALT = 0x9E3779B97F4A7C15
_MAX_SEED = (1 << 64) - 1

EXIT_CONSISTENT = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2
EXIT_UNRECOVERABLE = 3


@dataclass(frozen=True)
class ScenarioCommand:
    """One parsed scenario line in canonical form."""

    verb: str
    line_no: int
    count: int | None = None
    server: str | None = None
    block: str | None = None
    amount: int | None = None
    delta: int | None = None
    seed: int | None = None
    at_tick: int | None = None
    scope: tuple[str, ...] = ()

    def format(self) -> str:
        v = self.verb
        if v == "fleet":
            return f"fleet {self.count}"
        if v == "allocate":
            return f"allocate {self.server} {self.amount}"
        if v in ("append", "update"):
            text = f"{v} {self.server} {self.block} {self.amount}"
            if self.seed is not None:
                text += f" seed={self.seed}"
            return text
        if v == "delete":
            return f"delete {self.server} {self.block}"
        if v == "check":
            return "check"
        if v == "audit":
            return " ".join(("audit",) + self.scope)
        if v == "restorepoint":
            return "restorepoint"
        if v == "tamper_modify":
            return f"tamper modify {self.server} {self.block} {self.delta}"
        if v == "tamper_add":
            return f"tamper add {self.server} {self.block} {self.amount}"
        if v == "tamper_remove":
            return f"tamper remove {self.server} {self.block}"
        if v == "crash":
            return f"crash {self.server}"
        if v == "recover":
            text = f"recover {self.server}"
            if self.at_tick is not None:
                text += f" at={self.at_tick}"
            return text
        raise AssertionError(f"unformattable verb {v!r}")


def _uint(token: str, line_no: int, what: str) -> int:
    if not (token.isascii() and token.isdigit()):
        raise ScenarioParseError(line_no, f"{what} is not an unsigned integer: {token!r}")
    return int(token)


def _signed(token: str, line_no: int, what: str) -> int:
    body = token[1:] if token[:1] in ("+", "-") else token
    if not (body.isascii() and body.isdigit()):
        raise ScenarioParseError(line_no, f"{what} is not a signed integer: {token!r}")
    return int(token)


def _u64(token: str, line_no: int, what: str) -> int:
    value = _uint(token, line_no, what)
    if value > _MAX_SEED:
        raise ScenarioParseError(line_no, f"{what} exceeds 64 bits: {token!r}")
    return value


def _server(token: str, line_no: int) -> str:
    try:
        return validate_server_id(token)
    except SpaceLedgerError as exc:
        raise ScenarioParseError(line_no, str(exc)) from None


def _block(token: str, line_no: int) -> str:
    try:
        return validate_block_id(token)
    except SpaceLedgerError as exc:
        raise ScenarioParseError(line_no, str(exc)) from None


def _arity(tokens: list[str], n: int, line_no: int, usage: str) -> None:
    if len(tokens) != n:
        raise ScenarioParseError(
            line_no, f"expected '{usage}', got {len(tokens)} tokens"
        )


def _opt_kv(tokens: list[str], base: int, key: str, line_no: int) -> int | None:
    """Parse one optional trailing `key=<u64>` token after `base` fixed ones."""
    if len(tokens) == base:
        return None
    if len(tokens) == base + 1 and tokens[base].startswith(f"{key}="):
        return _u64(tokens[base].split("=", 1)[1], line_no, key)
    raise ScenarioParseError(
        line_no, f"trailing tokens {tokens[base:]!r}; only {key}=<n> is allowed"
    )


def parse_scenario(text: str) -> list[ScenarioCommand]:
    """Parse scenario text into commands; strict grammar, 1-based line errors."""
    commands = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        verb = tokens[0]
        if verb == "fleet":
            _arity(tokens, 2, line_no, "fleet <count>")
            cmd = ScenarioCommand(
                "fleet", line_no, count=_uint(tokens[1], line_no, "count")
            )
        elif verb == "allocate":
            _arity(tokens, 3, line_no, "allocate <server> <capacity-bytes>")
            cmd = ScenarioCommand(
                "allocate",
                line_no,
                server=_server(tokens[1], line_no),
                amount=_uint(tokens[2], line_no, "capacity"),
            )
        elif verb in ("append", "update"):
            if len(tokens) not in (4, 5):
                raise ScenarioParseError(
                    line_no,
                    f"expected '{verb} <server> <block-id> <bytes> [seed=<u64>]'",
                )
            cmd = ScenarioCommand(
                verb,
                line_no,
                server=_server(tokens[1], line_no),
                block=_block(tokens[2], line_no),
                amount=_uint(tokens[3], line_no, "size"),
                seed=_opt_kv(tokens, 4, "seed", line_no),
            )
        elif verb == "delete":
            _arity(tokens, 3, line_no, "delete <server> <block-id>")
            cmd = ScenarioCommand(
                "delete",
                line_no,
                server=_server(tokens[1], line_no),
                block=_block(tokens[2], line_no),
            )
        elif verb == "check":
            _arity(tokens, 1, line_no, "check")
            cmd = ScenarioCommand("check", line_no)
        elif verb == "audit":
            cmd = ScenarioCommand(
                "audit",
                line_no,
                scope=tuple(_server(t, line_no) for t in tokens[1:]),
            )
        elif verb == "restorepoint":
            _arity(tokens, 1, line_no, "restorepoint")
            cmd = ScenarioCommand("restorepoint", line_no)
        elif verb == "tamper":
            if len(tokens) < 2:
                raise ScenarioParseError(line_no, "tamper needs modify|add|remove")
            sub = tokens[1]
            if sub == "modify":
                _arity(tokens, 5, line_no, "tamper modify <server> <block-id> <delta>")
                cmd = ScenarioCommand(
                    "tamper_modify",
                    line_no,
                    server=_server(tokens[2], line_no),
                    block=_block(tokens[3], line_no),
                    delta=_signed(tokens[4], line_no, "delta"),
                )
            elif sub == "add":
                _arity(tokens, 5, line_no, "tamper add <server> <block-id> <bytes>")
                cmd = ScenarioCommand(
                    "tamper_add",
                    line_no,
                    server=_server(tokens[2], line_no),
                    block=_block(tokens[3], line_no),
                    amount=_uint(tokens[4], line_no, "size"),
                )
            elif sub == "remove":
                _arity(tokens, 4, line_no, "tamper remove <server> <block-id>")
                cmd = ScenarioCommand(
                    "tamper_remove",
                    line_no,
                    server=_server(tokens[2], line_no),
                    block=_block(tokens[3], line_no),
                )
            else:
                raise ScenarioParseError(line_no, f"unknown tamper kind {sub!r}")
        elif verb == "crash":
            _arity(tokens, 2, line_no, "crash <server>")
            cmd = ScenarioCommand("crash", line_no, server=_server(tokens[1], line_no))
        elif verb == "recover":
            if len(tokens) not in (2, 3):
                raise ScenarioParseError(line_no, "expected 'recover <server> [at=<tick>]'")
            cmd = ScenarioCommand(
                "recover",
                line_no,
                server=_server(tokens[1], line_no),
                at_tick=_opt_kv(tokens, 2, "at", line_no),
            )
        else:
            raise ScenarioParseError(line_no, f"unknown verb {verb!r}")
        commands.append(cmd)
    return commands


def format_scenario(commands: list[ScenarioCommand]) -> str:
    """Render commands back to canonical scenario text."""
    return "".join(cmd.format() + "\n" for cmd in commands)


@dataclass(frozen=True)
class RunOptions:
    auto_check: bool = True
    auto_restore: bool = True
    seed: int = 0


@dataclass(frozen=True)
class RunReport:
    """Full run output: report text, final serialized ledger, exit code."""

    text: str
    exit_code: int
    ledger_text: str


class _Run:
    """Mutable state for one scenario execution."""

    def __init__(self, options: RunOptions):
        self.options = options
        self.ledger = ClientLedger()
        self.fleet: Fleet | None = None
        self.store = RestoreStore()
        self.adversary = Adversary(options.seed ^ _ADVERSARY_SALT)
        self.seeds = SeedStream(options.seed)
        self.parts: list[str] = []
        self.worst = Verdict.CONSISTENT

    def require_fleet(self) -> Fleet:
        if self.fleet is None:
            raise ConfigurationError("no fleet; scenarios start with 'fleet <count>'")
        return self.fleet

    def emit(self, report: IntegrityReport, header: str) -> None:
        self.parts.append(format_report(report, header=header))
        summary = report.summary
        if summary is Verdict.VIOLATION:
            self.worst = Verdict.VIOLATION
        elif summary is Verdict.UNAVAILABLE and self.worst is Verdict.CONSISTENT:
            self.worst = Verdict.UNAVAILABLE

    def auto_check(self) -> None:
        if self.options.auto_check:
            self.emit(compare_spaces(self.ledger, self.require_fleet()), "CHECK")


def _execute(run: _Run, cmd: ScenarioCommand) -> None:
    opts = run.options
    verb = cmd.verb
    if verb == "fleet":
        if run.fleet is not None:
            raise ConfigurationError("fleet already created")
        run.fleet = create_fleet(cmd.count)
        return
    fleet = run.require_fleet()
    if verb == "allocate":
        allocate(fleet, cmd.server, cmd.amount)
        run.ledger.allocate(cmd.server, cmd.amount)
        run.auto_check()
    elif verb in ("append", "update", "delete"):
        store = run.store if opts.auto_restore else None
        if verb == "append":
            blockops.append_block(
                run.ledger,
                fleet,
                cmd.server,
                cmd.block,
                cmd.amount,
                seed=cmd.seed if cmd.seed is not None else run.seeds.next_seed(),
                restore_store=store,
                pre_check=opts.auto_check,
            )
        elif verb == "update":
            blockops.update_block(
                run.ledger,
                fleet,
                cmd.server,
                cmd.block,
                cmd.amount,
                seed=cmd.seed if cmd.seed is not None else run.seeds.next_seed(),
                restore_store=store,
                pre_check=opts.auto_check,
            )
        else:
            blockops.delete_block(
                run.ledger,
                fleet,
                cmd.server,
                cmd.block,
                restore_store=store,
                pre_check=opts.auto_check,
            )
        run.auto_check()
    elif verb == "check":
        run.emit(compare_spaces(run.ledger, fleet), "CHECK")
    elif verb == "audit":
        scope = cmd.scope if cmd.scope else tuple(fleet.server_ids())
        grant = AuditGrant(granted=True, scope=scope)
        run.emit(tpa_audit(grant, public_view(run.ledger), fleet), "AUDIT")
    elif verb == "restorepoint":
        create_restore_point(run.store, fleet, run.ledger.advance_tick())
    elif verb == "tamper_modify":
        run.adversary.tamper_modify(fleet, cmd.server, cmd.block, cmd.delta)
    elif verb == "tamper_add":
        run.adversary.tamper_add(fleet, cmd.server, cmd.block, cmd.amount)
    elif verb == "tamper_remove":
        run.adversary.tamper_remove(fleet, cmd.server, cmd.block)
    elif verb == "crash":
        crash_server(fleet, cmd.server)
    elif verb == "recover":
        note = recover(run.store, fleet, run.ledger, cmd.server, cmd.at_tick)
        run.parts.append(note.format() + "\n")
        run.auto_check()
    else:  # pragma: no cover - parser rejects unknown verbs
        raise AssertionError(f"unexecutable verb {verb!r}")


def run_scenario(
    commands: list[ScenarioCommand], options: RunOptions | None = None
) -> RunReport:
    """Execute parsed commands against fresh state.

    Detection outcomes (violation rows) are not errors: the run continues and
    exits 2 at the end. Operational errors abort the run with exit 3.
    """
    options = options or RunOptions()
    run = _Run(options)
    failed = False
    for cmd in commands:
        try:
            _execute(run, cmd)
        except SpaceLedgerError as exc:
            run.parts.append(f"ERROR line={cmd.line_no} {exc}\n")
            failed = True
            break
    if failed:
        verdict, code = "ERROR", EXIT_UNRECOVERABLE
    elif run.worst is Verdict.VIOLATION:
        verdict, code = Verdict.VIOLATION.value, EXIT_VIOLATION
    else:
        verdict, code = run.worst.value, EXIT_CONSISTENT
    run.parts.append(f"RESULT verdict={verdict} exit={code}\n")
    return RunReport(
        text="".join(run.parts),
        exit_code=code,
        ledger_text=ledger_save(run.ledger),
    )


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _u64_flag(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= _MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed outside unsigned 64-bit range: {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="spaceledger",
        description="Run a storage-integrity scenario file deterministically.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("scenario", help="path to the scenario file")
    run_p.add_argument("--report", help="write the run report here instead of stdout")
    run_p.add_argument("--ledger", help="write the final ledger to this path")
    run_p.add_argument("--seed", type=_u64_flag, default=0, help="base seed (default 0)")
    run_p.add_argument(
        "--no-auto-check",
        action="store_true",
        help="do not insert a check after every mutating command",
    )
    run_p.add_argument(
        "--no-auto-restore",
        action="store_true",
        help="do not snapshot a restore point after every data operation",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        commands = parse_scenario(text)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    options = RunOptions(
        auto_check=not args.no_auto_check,
        auto_restore=not args.no_auto_restore,
        seed=args.seed,
    )
    report = run_scenario(commands, options)
    try:
        if args.report:
            Path(args.report).write_text(report.text, encoding="utf-8", newline="")
        else:
            sys.stdout.write(report.text)
        if args.ledger:
            Path(args.ledger).write_text(
                report.ledger_text, encoding="utf-8", newline=""
            )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
