"""Keystroke jitter seals: keyed derivation, chained sealing, verification.

Every sealed keystroke carries a jitter value derived by HMAC-SHA256 from the
session secret over six bound inputs (ordinal, document hash, timestamp, zone
transition, interval bucket, previous jitter) and a SHA-256 hash chain linking
the sample to its predecessor.  Without the session secret, a forger must
guess each jitter out of the configured range; the chain hash additionally
binds the recorded values in order.

Sealing is strictly sequential (each sample depends on its predecessor);
verification is pure and may be parallelised across samples since every input
it needs is recorded.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import struct
from dataclasses import dataclass, field

from .errors import ChainError, ParameterError

SECRET_LEN = 32
SESSION_ID_LEN = 16

DEFAULT_JITTER_MIN_US = 500
DEFAULT_JITTER_MAX_US = 3000
DEFAULT_SAMPLE_INTERVAL = 1

# Domain tag for the chain hash; the genesis predecessor is all zeroes.
CHAIN_PREFIX = b"WTNSSEAL"
GENESIS_HASH = bytes(32)

# HMAC message layout: ordinal(8) || doc_hash(32) || timestamp_us(8) ||
# zone_code(1) || bucket(1) || prev_jitter_us(4), integers big-endian.
_MAC_MESSAGE = struct.Struct(">Q32sQBBI")

# Chain material: prefix(8) || ordinal(8) || timestamp_us(8) || doc_hash(32)
# || jitter_us(4) || prev_chain_hash(32).
_CHAIN_MATERIAL = struct.Struct(">8sQQ32sI32s")

_U32_MAX = 0xFFFFFFFF
_U64_MAX = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SessionSecret:
    """256-bit session secret; repr never prints the value."""

    value: bytes

    def __post_init__(self) -> None:
        if len(self.value) != SECRET_LEN:
            raise ParameterError(
                f"session secret must be {SECRET_LEN} bytes, got {len(self.value)}"
            )

    def __repr__(self) -> str:  # avoid leaking the secret into logs
        return "SessionSecret(<32 bytes>)"


@dataclass(frozen=True)
class SessionParams:
    """Jitter range (microseconds) and sampling interval (keystrokes)."""

    jitter_min_us: int = DEFAULT_JITTER_MIN_US
    jitter_max_us: int = DEFAULT_JITTER_MAX_US
    sample_interval: int = DEFAULT_SAMPLE_INTERVAL

    def __post_init__(self) -> None:
        if not 0 <= self.jitter_min_us < self.jitter_max_us <= _U32_MAX:
            raise ParameterError(
                f"invalid jitter range [{self.jitter_min_us}, {self.jitter_max_us})"
            )
        if self.jitter_range_us < 2:
            raise ParameterError("jitter range must span at least 2 microseconds")
        if self.sample_interval < 1:
            raise ParameterError("sample_interval must be >= 1")

    @property
    def jitter_range_us(self) -> int:
        return self.jitter_max_us - self.jitter_min_us


@dataclass(frozen=True)
class JitterSample:
    """One sealed keystroke record.

    Field widths match the wire format: ordinal and timestamp are u64,
    jitter is u32, zone_code and bucket are single bytes, hashes are 32
    bytes.  Values outside those widths are rejected; semantic checks
    (bucket <= 9, jitter in range) are verification's job so that tampered
    records remain representable.
    """

    ordinal: int
    timestamp_us: int
    doc_hash: bytes
    zone_code: int
    bucket: int
    jitter_us: int
    chain_hash: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.ordinal <= _U64_MAX:
            raise ParameterError("ordinal out of u64 range")
        if not 0 <= self.timestamp_us <= _U64_MAX:
            raise ParameterError("timestamp_us out of u64 range")
        if len(self.doc_hash) != 32:
            raise ParameterError("doc_hash must be 32 bytes")
        if not 0 <= self.zone_code <= 0xFF:
            raise ParameterError("zone_code out of byte range")
        if not 0 <= self.bucket <= 0xFF:
            raise ParameterError("bucket out of byte range")
        if not 0 <= self.jitter_us <= _U32_MAX:
            raise ParameterError("jitter_us out of u32 range")
        if len(self.chain_hash) != 32:
            raise ParameterError("chain_hash must be 32 bytes")


@dataclass
class SealChain:
    """Ordered sequence of jitter samples under one session's parameters."""

    params: SessionParams
    session_id: bytes
    samples: list[JitterSample] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.session_id) != SESSION_ID_LEN:
            raise ParameterError(f"session_id must be {SESSION_ID_LEN} bytes")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def last_chain_hash(self) -> bytes:
        return self.samples[-1].chain_hash if self.samples else GENESIS_HASH

    @property
    def last_jitter_us(self) -> int:
        return self.samples[-1].jitter_us if self.samples else 0

    @property
    def last_ordinal(self) -> int:
        return self.samples[-1].ordinal if self.samples else 0


@dataclass(frozen=True)
class ChainVerdict:
    """Outcome of verify_chain; falsy when rejected."""

    accepted: bool
    reason: str | None = None
    ordinal: int | None = None

    def __bool__(self) -> bool:
        return self.accepted


ACCEPT = ChainVerdict(True)


def setup(
    rng=None, overrides: SessionParams | None = None
) -> tuple[SessionSecret, SessionParams]:
    """Create a fresh session secret and parameter set.

    ``rng`` may supply a ``randbytes(n)`` source (e.g. a seeded
    ``random.Random`` for reproducible simulations); by default the secret
    comes from the operating system's CSPRNG.  ``overrides`` replaces the
    default parameters wholesale and is validated by its own constructor.
    """
    raw = rng.randbytes(SECRET_LEN) if rng is not None else secrets.token_bytes(SECRET_LEN)
    return SessionSecret(raw), overrides if overrides is not None else SessionParams()


class KeyedJitter:
    """Jitter derivation with precomputed HMAC pads for one secret.

    Produces byte-identical results to :func:`derive_jitter`; the inner and
    outer SHA-256 states are hashed once per secret instead of once per call,
    which matters in sealing and bulk-verification loops.
    """

    __slots__ = ("_inner", "_outer", "_jmin", "_range")

    def __init__(self, secret: SessionSecret, params: SessionParams):
        padded = secret.value + bytes(64 - SECRET_LEN)
        self._inner = hashlib.sha256(bytes(b ^ 0x36 for b in padded))
        self._outer = hashlib.sha256(bytes(b ^ 0x5C for b in padded))
        self._jmin = params.jitter_min_us
        self._range = params.jitter_range_us

    def derive(
        self,
        ordinal: int,
        doc_hash: bytes,
        timestamp_us: int,
        zone_code: int,
        bucket: int,
        prev_jitter_us: int,
    ) -> int:
        inner = self._inner.copy()
        inner.update(
            _MAC_MESSAGE.pack(ordinal, doc_hash, timestamp_us, zone_code, bucket, prev_jitter_us)
        )
        outer = self._outer.copy()
        outer.update(inner.digest())
        raw = int.from_bytes(outer.digest()[:4], "big")
        return self._jmin + raw % self._range


def derive_jitter(
    secret: SessionSecret,
    ordinal: int,
    doc_hash: bytes,
    timestamp_us: int,
    zone_code: int,
    bucket: int,
    prev_jitter_us: int,
    params: SessionParams,
) -> int:
    """Derive the jitter value bound to one keystroke's inputs.

    The MAC message is the fixed 54-byte layout ordinal(8) || doc_hash(32) ||
    timestamp(8) || zone_code(1) || bucket(1) || prev_jitter(4), all integers
    big-endian; the first four MAC bytes, read big-endian, select a value in
    [jitter_min_us, jitter_max_us).
    """
    if not 0 <= bucket <= 0xFF:
        raise ParameterError("bucket out of byte range")
    msg = _MAC_MESSAGE.pack(ordinal, doc_hash, timestamp_us, zone_code, bucket, prev_jitter_us)
    mac = hmac.digest(secret.value, msg, "sha256")
    raw = int.from_bytes(mac[:4], "big")
    return params.jitter_min_us + raw % params.jitter_range_us


def chain_hash(
    ordinal: int,
    timestamp_us: int,
    doc_hash: bytes,
    jitter_us: int,
    prev_chain_hash: bytes,
) -> bytes:
    """SHA-256 chain link over the sample's committed fields."""
    return hashlib.sha256(
        _CHAIN_MATERIAL.pack(
            CHAIN_PREFIX, ordinal, timestamp_us, doc_hash, jitter_us, prev_chain_hash
        )
    ).digest()


def seal_keystroke(
    chain: SealChain,
    secret: SessionSecret,
    timestamp_us: int,
    doc_hash: bytes,
    zone_code: int,
    bucket: int,
    *,
    keyed: KeyedJitter | None = None,
) -> JitterSample:
    """Append one sealed sample to ``chain`` and return it.

    The new ordinal advances by the configured sampling interval (the first
    sample has ordinal 1); the previous sample supplies the predecessor
    jitter and chain hash, with all-zero genesis values for the first
    sample.  ``keyed`` may pass a prepared :class:`KeyedJitter` for the hot
    path; it must wrap the same secret and parameters.
    """
    if chain.samples and timestamp_us < chain.samples[-1].timestamp_us:
        raise ChainError(
            f"timestamp {timestamp_us} precedes predecessor "
            f"{chain.samples[-1].timestamp_us}",
            ordinal=chain.last_ordinal + chain.params.sample_interval,
        )
    ordinal = 1 if not chain.samples else chain.last_ordinal + chain.params.sample_interval
    if keyed is None:
        jitter = derive_jitter(
            secret, ordinal, doc_hash, timestamp_us, zone_code, bucket,
            chain.last_jitter_us, chain.params,
        )
    else:
        jitter = keyed.derive(
            ordinal, doc_hash, timestamp_us, zone_code, bucket, chain.last_jitter_us
        )
    sample = JitterSample(
        ordinal=ordinal,
        timestamp_us=timestamp_us,
        doc_hash=doc_hash,
        zone_code=zone_code,
        bucket=bucket,
        jitter_us=jitter,
        chain_hash=chain_hash(ordinal, timestamp_us, doc_hash, jitter, chain.last_chain_hash),
    )
    chain.samples.append(sample)
    return sample


def verify_chain(secret: SessionSecret, chain: SealChain) -> ChainVerdict:
    """Check every sample's jitter and chain hash against recomputation.

    Accepts iff, for each sample in order: the ordinal follows the sampling
    interval from 1, timestamps never regress, the recorded jitter equals the
    keyed derivation over the recorded fields and recorded predecessor
    jitter, and the chain hash equals recomputation from the recorded
    predecessor hash.  The verdict pinpoints the first failing ordinal.
    An empty chain verifies trivially.
    """
    keyed = KeyedJitter(secret, chain.params)
    interval = chain.params.sample_interval
    expected_ordinal = 1
    prev_jitter = 0
    prev_hash = GENESIS_HASH
    prev_ts = 0
    for sample in chain.samples:
        if sample.ordinal != expected_ordinal:
            return ChainVerdict(False, "ordinal-mismatch", sample.ordinal)
        if sample.timestamp_us < prev_ts:
            return ChainVerdict(False, "timestamp-regression", sample.ordinal)
        derived = keyed.derive(
            sample.ordinal, sample.doc_hash, sample.timestamp_us,
            sample.zone_code, sample.bucket, prev_jitter,
        )
        if derived != sample.jitter_us:
            return ChainVerdict(False, "jitter-mismatch", sample.ordinal)
        expected_hash = chain_hash(
            sample.ordinal, sample.timestamp_us, sample.doc_hash,
            sample.jitter_us, prev_hash,
        )
        if expected_hash != sample.chain_hash:
            return ChainVerdict(False, "hash-mismatch", sample.ordinal)
        expected_ordinal += interval
        prev_jitter = sample.jitter_us
        prev_hash = sample.chain_hash
        prev_ts = sample.timestamp_us
    return ACCEPT
