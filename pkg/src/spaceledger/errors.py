"""Exception types raised by the spaceledger library."""

from __future__ import annotations


class SpaceLedgerError(Exception):
    """Base class for all spaceledger errors."""


class BoundsError(SpaceLedgerError):
    """A numeric argument is outside its allowed range."""


class TokenError(SpaceLedgerError):
    """A server or block identifier is malformed."""


class UnknownServerError(SpaceLedgerError):
    """The named server does not exist."""


class UnknownBlockError(SpaceLedgerError):
    """The named block does not exist on the server."""


class DuplicateBlockError(SpaceLedgerError):
    """A block with that identifier already exists on the server."""


class CapacityError(SpaceLedgerError):
    """The operation would push used space past the server's capacity."""


class CrashedServerError(SpaceLedgerError):
    """The server is crashed; data operations and measurement are unavailable."""


class EmptyServerError(SpaceLedgerError):
    """Deletion requested on a server holding no data."""


class AllocationError(SpaceLedgerError):
    """Capacity reallocation attempted on a server that is not empty."""


class MonotonicityError(SpaceLedgerError):
    """A logical tick does not advance past the current one."""


class RecordError(SpaceLedgerError):
    """An operation record is internally inconsistent with the ledger."""


class LedgerFormatError(SpaceLedgerError):
    """A serialized ledger stream is malformed.

    `line_no` is the 1-based line of the offending input.
    """

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigurationError(SpaceLedgerError):
    """Ledger, fleet, and audit scope do not describe the same servers."""


class DelegationError(SpaceLedgerError):
    """Audit attempted without the user's delegation."""


class UnrecoverableError(SpaceLedgerError):
    """Recovery requested but no usable restore point exists."""


class ScenarioParseError(SpaceLedgerError):
    """A scenario file line does not match the command grammar.

    `line_no` is the 1-based line of the offending input.
    """

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UsageError(SpaceLedgerError):
    """Bad command-line flags or arguments."""
