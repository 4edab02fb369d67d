"""External time anchoring: tsa-lite timestamp receipts and a calendar stub.

The timestamp authority speaks "tsa-lite", a deterministic byte layout that
mirrors the request/receipt semantics of a standard timestamping protocol
(SHA-256 message imprint, nonce echo, signed response) without the ASN.1
codec; the encoding seam is isolated here so a strict DER implementation
could be swapped in.  Receipts are signed with Ed25519 and verified against
an explicitly configured signer key, never a PKI path.

The calendar aggregator batches submitted digests into one Merkle tree per
finalize call and issues per-digest inclusion proofs against a pseudo anchor
(a hash commitment standing in for an on-chain transaction).

Both anchor kinds verify independently: the receipt check needs only the
signer key, the calendar check only hash recomputation.
"""

from __future__ import annotations

import hashlib
import secrets
import struct
import threading
import time
import urllib.request
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import EmptyBatchError, ParameterError
from .evidence_log import node_hash

REQUEST_MAGIC = b"WTSAREQ1"
RECEIPT_MAGIC = b"WTSARSP1"
NONCE_LEN = 8

DEFAULT_SIGNER_ID = "witnessd-mock-tsa"
TSA_URL_ENV = "WITNESSD_TSA_URL"


def _now_us() -> int:
    return time.time_ns() // 1000


# ---------------------------------------------------------------------------
# tsa-lite wire format
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TsaRequest:
    """Timestamp request: the imprint is the digest being anchored."""

    message_imprint: bytes
    nonce: bytes
    policy_id: str = ""

    def __post_init__(self) -> None:
        if len(self.message_imprint) != 32:
            raise ParameterError("message imprint must be a 32-byte digest")
        if len(self.nonce) != NONCE_LEN:
            raise ParameterError(f"nonce must be {NONCE_LEN} bytes")


@dataclass(frozen=True)
class TsaReceipt:
    """Signed timestamp response echoing the request's imprint and nonce."""

    message_imprint: bytes
    nonce: bytes
    gen_time_us: int
    serial: int
    signer_id: str
    signature: bytes


def encode_tsa_request(request: TsaRequest) -> bytes:
    policy = request.policy_id.encode("utf-8")
    return (
        REQUEST_MAGIC
        + request.message_imprint
        + request.nonce
        + struct.pack(">H", len(policy))
        + policy
    )


def decode_tsa_request(data: bytes) -> TsaRequest:
    if len(data) < len(REQUEST_MAGIC) + 32 + NONCE_LEN + 2:
        raise ParameterError("request too short")
    if not data.startswith(REQUEST_MAGIC):
        raise ParameterError("bad request magic")
    offset = len(REQUEST_MAGIC)
    imprint = data[offset:offset + 32]
    offset += 32
    nonce = data[offset:offset + NONCE_LEN]
    offset += NONCE_LEN
    (policy_len,) = struct.unpack_from(">H", data, offset)
    offset += 2
    policy = data[offset:offset + policy_len]
    if len(policy) != policy_len or offset + policy_len != len(data):
        raise ParameterError("request length mismatch")
    return TsaRequest(imprint, nonce, policy.decode("utf-8"))


def _receipt_signed_payload(receipt: TsaReceipt) -> bytes:
    signer = receipt.signer_id.encode("utf-8")
    return (
        RECEIPT_MAGIC
        + receipt.message_imprint
        + receipt.nonce
        + struct.pack(">QQ", receipt.gen_time_us, receipt.serial)
        + struct.pack(">H", len(signer))
        + signer
    )


def encode_tsa_receipt(receipt: TsaReceipt) -> bytes:
    return (
        _receipt_signed_payload(receipt)
        + struct.pack(">H", len(receipt.signature))
        + receipt.signature
    )


def decode_tsa_receipt(data: bytes) -> TsaReceipt:
    header = len(RECEIPT_MAGIC) + 32 + NONCE_LEN + 16 + 2
    if len(data) < header:
        raise ParameterError("receipt too short")
    if not data.startswith(RECEIPT_MAGIC):
        raise ParameterError("bad receipt magic")
    offset = len(RECEIPT_MAGIC)
    imprint = data[offset:offset + 32]
    offset += 32
    nonce = data[offset:offset + NONCE_LEN]
    offset += NONCE_LEN
    gen_time_us, serial = struct.unpack_from(">QQ", data, offset)
    offset += 16
    (signer_len,) = struct.unpack_from(">H", data, offset)
    offset += 2
    signer = data[offset:offset + signer_len]
    if len(signer) != signer_len:
        raise ParameterError("receipt truncated in signer id")
    offset += signer_len
    if len(data) < offset + 2:
        raise ParameterError("receipt truncated before signature")
    (sig_len,) = struct.unpack_from(">H", data, offset)
    offset += 2
    signature = data[offset:offset + sig_len]
    if len(signature) != sig_len or offset + sig_len != len(data):
        raise ParameterError("receipt length mismatch")
    return TsaReceipt(
        imprint, nonce, gen_time_us, serial, signer.decode("utf-8"), signature
    )


def build_tsa_request(root: bytes, rng=None, policy_id: str = "") -> TsaRequest:
    """Build a request for a 32-byte digest with a fresh nonce."""
    if len(root) != 32:
        raise ParameterError("anchored root must be a 32-byte digest")
    nonce = rng.randbytes(NONCE_LEN) if rng is not None else secrets.token_bytes(NONCE_LEN)
    return TsaRequest(root, nonce, policy_id)


@dataclass(frozen=True)
class AnchorVerdict:
    accepted: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


def verify_tsa_receipt(
    request: TsaRequest,
    receipt: TsaReceipt,
    trusted_signers: dict[str, bytes],
) -> AnchorVerdict:
    """Check signer trust, signature, imprint echo, and nonce echo in order.

    ``trusted_signers`` maps signer ids to raw 32-byte Ed25519 public keys.
    """
    key_bytes = trusted_signers.get(receipt.signer_id)
    if key_bytes is None:
        return AnchorVerdict(False, "unknown-signer")
    try:
        public_key = Ed25519PublicKey.from_public_bytes(key_bytes)
        public_key.verify(receipt.signature, _receipt_signed_payload(receipt))
    except (InvalidSignature, ValueError):
        return AnchorVerdict(False, "bad-signature")
    if receipt.message_imprint != request.message_imprint:
        return AnchorVerdict(False, "imprint-mismatch")
    if receipt.nonce != request.nonce:
        return AnchorVerdict(False, "nonce-mismatch")
    return AnchorVerdict(True)


# ---------------------------------------------------------------------------
# Mock timestamp authority (in-process and HTTP)
# ---------------------------------------------------------------------------


class TimestampAuthority:
    """Signs tsa-lite requests with an Ed25519 key and a serial counter."""

    def __init__(
        self,
        signer_id: str = DEFAULT_SIGNER_ID,
        private_key: Ed25519PrivateKey | None = None,
        clock=None,
    ):
        self.signer_id = signer_id
        self._key = private_key if private_key is not None else Ed25519PrivateKey.generate()
        self._clock = clock if clock is not None else _now_us
        self._serial = 0
        self._lock = threading.Lock()

    @property
    def public_key_bytes(self) -> bytes:
        from cryptography.hazmat.primitives.serialization import (
            Encoding,
            PublicFormat,
        )

        return self._key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)

    def stamp(self, request_bytes: bytes) -> bytes:
        request = decode_tsa_request(request_bytes)
        with self._lock:
            self._serial += 1
            serial = self._serial
        unsigned = TsaReceipt(
            message_imprint=request.message_imprint,
            nonce=request.nonce,
            gen_time_us=int(self._clock()),
            serial=serial,
            signer_id=self.signer_id,
            signature=b"",
        )
        signature = self._key.sign(_receipt_signed_payload(unsigned))
        receipt = TsaReceipt(
            unsigned.message_imprint,
            unsigned.nonce,
            unsigned.gen_time_us,
            unsigned.serial,
            unsigned.signer_id,
            signature,
        )
        return encode_tsa_receipt(receipt)


class _TsaRequestHandler(BaseHTTPRequestHandler):
    authority: TimestampAuthority  # set by server factory

    def do_POST(self):  # noqa: N802 (http.server API)
        if self.path != "/stamp":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length)
        try:
            receipt = self.authority.stamp(body)
        except ParameterError as exc:
            self.send_error(400, str(exc))
            return
        self.send_response(200)
        self.send_header("Content-Type", "application/octet-stream")
        self.send_header("Content-Length", str(len(receipt)))
        self.end_headers()
        self.wfile.write(receipt)

    def do_GET(self):  # noqa: N802
        if self.path != "/pubkey":
            self.send_error(404)
            return
        payload = (
            '{"signer_id": "%s", "public_key_hex": "%s"}'
            % (self.authority.signer_id, self.authority.public_key_bytes.hex())
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, fmt, *args):  # quiet by default
        pass


def make_tsa_server(
    authority: TimestampAuthority, host: str = "127.0.0.1", port: int = 0
) -> ThreadingHTTPServer:
    handler = type("BoundTsaHandler", (_TsaRequestHandler,), {"authority": authority})
    return ThreadingHTTPServer((host, port), handler)


def start_tsa_server(
    authority: TimestampAuthority, host: str = "127.0.0.1", port: int = 0
) -> tuple[ThreadingHTTPServer, threading.Thread, str]:
    """Run a TSA server on a background thread; returns (server, thread, url)."""
    server = make_tsa_server(authority, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://{server.server_address[0]}:{server.server_address[1]}"
    return server, thread, url


class TsaClient:
    """Thin HTTP client for the /stamp and /pubkey endpoints."""

    def __init__(self, base_url: str, timeout_s: float = 5.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def stamp(self, request: TsaRequest) -> TsaReceipt:
        req = urllib.request.Request(
            f"{self.base_url}/stamp",
            data=encode_tsa_request(request),
            headers={"Content-Type": "application/octet-stream"},
            method="POST",
        )
        with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
            return decode_tsa_receipt(resp.read())

    def fetch_signer(self) -> tuple[str, bytes]:
        import json

        with urllib.request.urlopen(
            f"{self.base_url}/pubkey", timeout=self.timeout_s
        ) as resp:
            payload = json.loads(resp.read())
        return payload["signer_id"], bytes.fromhex(payload["public_key_hex"])


# ---------------------------------------------------------------------------
# Calendar-style Merkle aggregator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalendarProof:
    """Inclusion of a digest in a finalized aggregation batch."""

    digest: bytes
    path: tuple[tuple[str, bytes], ...]
    pseudo_anchor_id: bytes
    anchor_time_us: int


class CalendarAggregator:
    """Batches digests and commits each batch under one aggregation root.

    Submissions may come from multiple threads; finalize drains the pending
    batch atomically.  The pseudo anchor id is the SHA-256 of the
    aggregation root, standing in for an external chain commitment.
    """

    def __init__(self, clock=None):
        self._pending: list[bytes] = []
        self._lock = threading.Lock()
        self._clock = clock if clock is not None else _now_us

    def submit(self, digest: bytes) -> int:
        if len(digest) != 32:
            raise ParameterError("calendar digest must be 32 bytes")
        with self._lock:
            self._pending.append(digest)
            return len(self._pending) - 1

    def finalize(self) -> list[CalendarProof]:
        with self._lock:
            batch = self._pending
            self._pending = []
        if not batch:
            raise EmptyBatchError("no digests pending aggregation")
        anchor_time = int(self._clock())

        # Bottom-up tree; an odd trailing node is promoted unpaired.
        paths: list[list[tuple[str, bytes]]] = [[] for _ in batch]
        level = list(batch)
        owners: list[list[int]] = [[i] for i in range(len(batch))]
        while len(level) > 1:
            next_level: list[bytes] = []
            next_owners: list[list[int]] = []
            for i in range(0, len(level) - 1, 2):
                left, right = level[i], level[i + 1]
                for owner in owners[i]:
                    paths[owner].append(("right", right))
                for owner in owners[i + 1]:
                    paths[owner].append(("left", left))
                next_level.append(node_hash(left, right))
                next_owners.append(owners[i] + owners[i + 1])
            if len(level) % 2:
                next_level.append(level[-1])
                next_owners.append(owners[-1])
            level = next_level
            owners = next_owners
        root = level[0]
        anchor_id = hashlib.sha256(root).digest()
        return [
            CalendarProof(digest, tuple(path), anchor_id, anchor_time)
            for digest, path in zip(batch, paths)
        ]


def verify_calendar_proof(digest: bytes, proof: CalendarProof) -> bool:
    """Recompute the path from ``digest`` and check the anchor commitment."""
    if proof.digest != digest:
        return False
    acc = digest
    for side, sibling in proof.path:
        if side == "left":
            acc = node_hash(sibling, acc)
        elif side == "right":
            acc = node_hash(acc, sibling)
        else:
            return False
    return hashlib.sha256(acc).digest() == proof.pseudo_anchor_id


# ---------------------------------------------------------------------------
# Anchor sets and time windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnchorSet:
    """All external anchors collected for one packet."""

    receipts: tuple[TsaReceipt, ...] = ()
    calendar_proofs: tuple[CalendarProof, ...] = ()
    local_claim_time_us: int = 0

    @property
    def empty(self) -> bool:
        return not self.receipts and not self.calendar_proofs


@dataclass(frozen=True)
class AnchorWindow:
    """The claimed-to-anchored interval [local_claim, earliest_external]."""

    local_claim_us: int
    earliest_external_us: int

    @property
    def window(self) -> tuple[int, int]:
        return (self.local_claim_us, self.earliest_external_us)


def anchor_bounds(anchor_set: AnchorSet) -> AnchorWindow | None:
    """Earliest external anchor time, or None when unanchored.

    Adding anchors can only narrow the window: the bound is the minimum
    over all receipt and calendar times.
    """
    times = [r.gen_time_us for r in anchor_set.receipts]
    times += [p.anchor_time_us for p in anchor_set.calendar_proofs]
    if not times:
        return None
    return AnchorWindow(anchor_set.local_claim_time_us, min(times))
