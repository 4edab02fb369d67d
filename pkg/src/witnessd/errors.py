"""Exception hierarchy shared across the witnessd package."""

from __future__ import annotations


class WitnessdError(Exception):
    """Base class for all witnessd errors."""


class ParameterError(WitnessdError):
    """An argument violates a documented precondition or value range."""


class ChainError(WitnessdError):
    """A seal chain operation failed; carries the offending ordinal."""

    def __init__(self, message: str, ordinal: int | None = None):
        super().__init__(message)
        self.ordinal = ordinal


class UnmappedKeyError(WitnessdError):
    """A key identifier has no zone assignment."""

    def __init__(self, key: str):
        super().__init__(f"key {key!r} is not in the zone map")
        self.key = key


class StreamOrderError(WitnessdError):
    """An event stream was not time-ordered."""


class EmptyLogError(WitnessdError):
    """Requested a root or proof from an evidence log with no leaves."""


class EmptyBatchError(WitnessdError):
    """Calendar finalize was called with no pending digests."""


class LogFormatError(WitnessdError):
    """A persisted evidence-log file is malformed."""


class ProfileError(WitnessdError):
    """A timing-profile file is malformed or holds invalid values."""


class AssemblyError(WitnessdError):
    """Cross-layer invariants failed while assembling a packet."""

    def __init__(self, layer: str, message: str):
        super().__init__(f"{layer}: {message}")
        self.layer = layer


class PacketFormatError(WitnessdError):
    """Base class for packet parse failures."""


class BadMagicError(PacketFormatError):
    """The buffer does not start with the packet magic."""


class UnknownVersionError(PacketFormatError):
    """The packet declares a version this build does not understand."""


class TruncatedPacketError(PacketFormatError):
    """The buffer ended before the declared structure was complete."""


class TrailingDataError(PacketFormatError):
    """Extra bytes follow a structurally complete packet."""
