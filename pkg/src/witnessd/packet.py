"""Self-contained evidence packets: assembly, wire format, verification.

A packet bundles everything a verifier needs: the sealed keystroke chain,
VDF timing checkpoints, the evidence-log root, external anchor material,
and the dual-source match summary.  Layers verify independently, so the
report names exactly which layer a disputant would have to attack; missing
optional layers (checkpoints, anchors, dual-source) degrade the report
instead of rejecting it.

The binary format is canonical: big-endian, fixed section order, explicit
length prefixes, magic "WTNSPKT1".  deserialize(serialize(p)) == p and
re-serialization is a byte fixpoint.  A JSON export exists for human
inspection only; the binary is the sole verified input format.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

from . import vdf as vdf_mod
from .anchors import (
    AnchorSet,
    CalendarProof,
    TsaRequest,
    decode_tsa_receipt,
    encode_tsa_receipt,
    verify_calendar_proof,
    verify_tsa_receipt,
)
from .errors import (
    AssemblyError,
    BadMagicError,
    PacketFormatError,
    ParameterError,
    TrailingDataError,
    TruncatedPacketError,
    UnknownVersionError,
)
from .evidence_log import LeafRecord, MmrState, leaf_hash, mmr_append, mmr_root
from .input_model import ZONE_MAP_VERSION, MatchSummary
from .jitter_seal import (
    GENESIS_HASH,
    JitterSample,
    SealChain,
    SessionParams,
    SessionSecret,
    verify_chain,
)
from .vdf import VdfCheckpoint, VdfProof, compute_chain_binding

PACKET_MAGIC = b"WTNSPKT1"
PACKET_VERSION = 1

# Root recorded for a log with no leaves; an empty chain is still a packet.
ZERO_ROOT = bytes(32)
EMPTY_DOC_HASH = hashlib.sha256(b"").digest()

ATTESTATION_UNATTESTED = "unattested"
_ATTESTATION_CODES = {ATTESTATION_UNATTESTED: 0}
_ATTESTATION_NAMES = {0: ATTESTATION_UNATTESTED}

_SAMPLE = struct.Struct(">QQ32sBBI32s")
_SAMPLE_META = struct.Struct(">QQBBI32s")

LAYER_SEAL = "seal"
LAYER_VDF = "vdf"
LAYER_MMR = "mmr"
LAYER_ANCHORS = "anchors"
LAYER_DUAL_SOURCE = "dual_source"
LAYERS = (LAYER_SEAL, LAYER_VDF, LAYER_MMR, LAYER_ANCHORS, LAYER_DUAL_SOURCE)


@dataclass(frozen=True)
class PacketHeader:
    session_id: bytes
    session_epoch_us: int
    params: SessionParams
    vdf_params_id: str = ""
    zone_map_version: str = ZONE_MAP_VERSION
    content_kind: str = "text/plain"
    attestation: str = ATTESTATION_UNATTESTED

    def __post_init__(self) -> None:
        if len(self.session_id) != 16:
            raise ParameterError("session_id must be 16 bytes")
        if self.attestation not in _ATTESTATION_CODES:
            raise ParameterError(f"unknown attestation status {self.attestation!r}")


@dataclass(frozen=True)
class EvidencePacket:
    header: PacketHeader
    samples: tuple[JitterSample, ...]
    checkpoints: tuple[VdfCheckpoint, ...]
    mmr_root: bytes
    leaf_count: int
    anchors: AnchorSet
    dual_source: MatchSummary | None
    final_doc_hash: bytes

    @property
    def chain(self) -> SealChain:
        return SealChain(
            params=self.header.params,
            session_id=self.header.session_id,
            samples=list(self.samples),
        )


# ---------------------------------------------------------------------------
# Evidence-log derivation from samples
# ---------------------------------------------------------------------------


def sample_metadata_hash(sample: JitterSample) -> bytes:
    """Hash of the sample's serialized fields excluding the document hash."""
    return hashlib.sha256(
        _SAMPLE_META.pack(
            sample.ordinal,
            sample.timestamp_us,
            sample.zone_code,
            sample.bucket,
            sample.jitter_us,
            sample.chain_hash,
        )
    ).digest()


def sample_leaf_record(sample: JitterSample) -> LeafRecord:
    return LeafRecord(
        content_hash=sample.doc_hash, metadata_hash=sample_metadata_hash(sample)
    )


def compute_root(samples) -> tuple[bytes, int]:
    """Evidence-log root over the samples; an empty chain yields ZERO_ROOT."""
    state = MmrState.empty()
    for sample in samples:
        state = mmr_append(state, leaf_hash(sample_leaf_record(sample)))
    if state.leaf_count == 0:
        return ZERO_ROOT, 0
    return mmr_root(state), state.leaf_count


def prefix_roots(samples, up_to: int) -> list[bytes]:
    """Evidence-log roots for every prefix length 0..up_to (inclusive).

    Incremental construction keeps binding checks linear in the chain even
    when a packet carries thousands of checkpoints.
    """
    roots = [ZERO_ROOT]
    state = MmrState.empty()
    for sample in samples[:up_to]:
        state = mmr_append(state, leaf_hash(sample_leaf_record(sample)))
        roots.append(mmr_root(state))
    return roots


def prefix_binding(samples, prefix_len: int, index: int) -> bytes:
    """Recompute a checkpoint's chain binding over the first samples."""
    root, _ = compute_root(samples[:prefix_len])
    last_hash = samples[prefix_len - 1].chain_hash if prefix_len else GENESIS_HASH
    return compute_chain_binding(root, last_hash, index)


def _check_checkpoint_bindings(samples, checkpoints) -> tuple[int, str] | None:
    """First binding failure as (checkpoint index, reason), or None."""
    for ckpt in checkpoints:
        if ckpt.bound_leaf_count > len(samples):
            return ckpt.index, "binding-out-of-range"
    roots = prefix_roots(
        samples, max((c.bound_leaf_count for c in checkpoints), default=0)
    )
    for ckpt in checkpoints:
        bound = ckpt.bound_leaf_count
        last_hash = samples[bound - 1].chain_hash if bound else GENESIS_HASH
        expected = compute_chain_binding(roots[bound], last_hash, ckpt.index)
        if expected != ckpt.chain_binding:
            return ckpt.index, "binding-mismatch"
    return None


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def assemble_packet(
    chain: SealChain,
    checkpoints,
    log_state: MmrState,
    anchors: AnchorSet,
    dual_source: MatchSummary | None,
    header: PacketHeader,
) -> EvidencePacket:
    """Bundle the layers, enforcing the cross-layer invariants."""
    samples = tuple(chain.samples)
    derived_root, derived_count = compute_root(samples)
    if log_state.leaf_count != derived_count:
        raise AssemblyError(
            LAYER_MMR,
            f"log has {log_state.leaf_count} leaves but the chain yields {derived_count}",
        )
    state_root = mmr_root(log_state) if log_state.leaf_count else ZERO_ROOT
    if state_root != derived_root:
        raise AssemblyError(LAYER_MMR, "log root does not match the seal chain")
    checkpoints = tuple(checkpoints)
    failure = _check_checkpoint_bindings(samples, checkpoints)
    if failure is not None:
        index, reason = failure
        if reason == "binding-out-of-range":
            raise AssemblyError(LAYER_VDF, f"checkpoint {index} binds beyond the chain")
        raise AssemblyError(
            LAYER_VDF, f"checkpoint {index} binding does not match the log prefix"
        )
    final_doc = samples[-1].doc_hash if samples else EMPTY_DOC_HASH
    return EvidencePacket(
        header=header,
        samples=samples,
        checkpoints=checkpoints,
        mmr_root=derived_root,
        leaf_count=derived_count,
        anchors=anchors,
        dual_source=dual_source,
        final_doc_hash=final_doc,
    )


# ---------------------------------------------------------------------------
# Canonical binary serialization
# ---------------------------------------------------------------------------


def _pack_str(value: str) -> bytes:
    raw = value.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ParameterError("string field too long")
    return struct.pack(">H", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedPacketError(
                f"needed {n} bytes at offset {self.pos}, only "
                f"{len(self.data) - self.pos} remain"
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def string(self) -> str:
        return self.take(self.u16()).decode("utf-8")

    def done(self) -> bool:
        return self.pos == len(self.data)


def _section(body: bytes) -> bytes:
    return struct.pack(">I", len(body)) + body


def _encode_header(header: PacketHeader) -> bytes:
    return b"".join(
        (
            header.session_id,
            struct.pack(
                ">QIII",
                header.session_epoch_us,
                header.params.jitter_min_us,
                header.params.jitter_max_us,
                header.params.sample_interval,
            ),
            _pack_str(header.vdf_params_id),
            _pack_str(header.zone_map_version),
            _pack_str(header.content_kind),
            bytes([_ATTESTATION_CODES[header.attestation]]),
        )
    )


def _encode_samples(samples) -> bytes:
    parts = [struct.pack(">Q", len(samples))]
    parts.extend(
        _SAMPLE.pack(
            s.ordinal, s.timestamp_us, s.doc_hash, s.zone_code,
            s.bucket, s.jitter_us, s.chain_hash,
        )
        for s in samples
    )
    return b"".join(parts)


def _encode_checkpoints(checkpoints) -> bytes:
    parts = [struct.pack(">I", len(checkpoints))]
    for ckpt in checkpoints:
        try:
            elem = vdf_mod.get_params(ckpt.params_id).element_size
        except ParameterError:
            # Unknown set: fall back to the minimal width covering the values.
            elem = (
                max(ckpt.proof.input_x, ckpt.proof.output_y, *ckpt.proof.midpoints, 1)
                .bit_length() + 7
            ) // 8
        parts.append(struct.pack(">IQ", ckpt.index, ckpt.bound_leaf_count))
        parts.append(ckpt.chain_binding)
        parts.append(_pack_str(ckpt.params_id))
        parts.append(struct.pack(">H", elem))
        parts.append(ckpt.proof.input_x.to_bytes(elem, "big"))
        parts.append(ckpt.proof.output_y.to_bytes(elem, "big"))
        parts.append(struct.pack(">H", len(ckpt.proof.midpoints)))
        parts.extend(m.to_bytes(elem, "big") for m in ckpt.proof.midpoints)
    return b"".join(parts)


def _encode_anchors(anchors: AnchorSet) -> bytes:
    parts = [struct.pack(">Q", anchors.local_claim_time_us)]
    parts.append(struct.pack(">H", len(anchors.receipts)))
    for receipt in anchors.receipts:
        raw = encode_tsa_receipt(receipt)
        parts.append(struct.pack(">I", len(raw)))
        parts.append(raw)
    parts.append(struct.pack(">H", len(anchors.calendar_proofs)))
    for proof in anchors.calendar_proofs:
        parts.append(proof.digest)
        parts.append(proof.pseudo_anchor_id)
        parts.append(struct.pack(">Q", proof.anchor_time_us))
        parts.append(struct.pack(">H", len(proof.path)))
        for side, sibling in proof.path:
            parts.append(b"\x00" if side == "left" else b"\x01")
            parts.append(sibling)
    return b"".join(parts)


def serialize(packet: EvidencePacket) -> bytes:
    """Encode a packet in its canonical byte form."""
    mmr_section = packet.mmr_root + struct.pack(">Q", packet.leaf_count)
    if packet.dual_source is None:
        dual_section = b"\x00"
    else:
        dual_section = b"\x01" + struct.pack(
            ">QQQ",
            packet.dual_source.validated,
            packet.dual_source.injected_suspect,
            packet.dual_source.device_only,
        )
    return b"".join(
        (
            PACKET_MAGIC,
            struct.pack(">H", PACKET_VERSION),
            _section(_encode_header(packet.header)),
            _section(_encode_samples(packet.samples)),
            _section(_encode_checkpoints(packet.checkpoints)),
            _section(mmr_section),
            _section(_encode_anchors(packet.anchors)),
            _section(dual_section),
            _section(packet.final_doc_hash),
        )
    )


def _decode_header(reader: _Reader) -> PacketHeader:
    session_id = reader.take(16)
    epoch = reader.u64()
    jmin, jmax, interval = reader.u32(), reader.u32(), reader.u32()
    vdf_params_id = reader.string()
    zone_map_version = reader.string()
    content_kind = reader.string()
    attestation_code = reader.u8()
    if attestation_code not in _ATTESTATION_NAMES:
        raise PacketFormatError(f"unknown attestation code {attestation_code}")
    try:
        params = SessionParams(jmin, jmax, interval)
    except ParameterError as exc:
        raise PacketFormatError(f"invalid session params: {exc}") from exc
    return PacketHeader(
        session_id=session_id,
        session_epoch_us=epoch,
        params=params,
        vdf_params_id=vdf_params_id,
        zone_map_version=zone_map_version,
        content_kind=content_kind,
        attestation=_ATTESTATION_NAMES[attestation_code],
    )


def _decode_samples(reader: _Reader) -> tuple[JitterSample, ...]:
    count = reader.u64()
    samples = []
    for _ in range(count):
        ordinal, ts, doc, zone, bucket, jitter, chain = _SAMPLE.unpack(
            reader.take(_SAMPLE.size)
        )
        samples.append(JitterSample(ordinal, ts, doc, zone, bucket, jitter, chain))
    return tuple(samples)


def _decode_checkpoints(reader: _Reader) -> tuple[VdfCheckpoint, ...]:
    count = reader.u32()
    checkpoints = []
    for _ in range(count):
        index = reader.u32()
        bound = reader.u64()
        binding = reader.take(32)
        params_id = reader.string()
        elem = reader.u16()
        x = int.from_bytes(reader.take(elem), "big")
        y = int.from_bytes(reader.take(elem), "big")
        mid_count = reader.u16()
        mids = tuple(
            int.from_bytes(reader.take(elem), "big") for _ in range(mid_count)
        )
        # Reject padded re-encodings: the element width must be exactly what
        # serialization would choose, so equal packets have equal bytes.
        try:
            expected_elem = vdf_mod.get_params(params_id).element_size
        except ParameterError:
            expected_elem = (max(x, y, *mids, 1).bit_length() + 7) // 8
        if elem != expected_elem:
            raise PacketFormatError(
                f"non-canonical checkpoint element width {elem}, expected {expected_elem}"
            )
        checkpoints.append(
            VdfCheckpoint(index, bound, binding, params_id, VdfProof(x, y, mids))
        )
    return tuple(checkpoints)


def _decode_anchors(reader: _Reader) -> AnchorSet:
    local_claim = reader.u64()
    receipts = []
    for _ in range(reader.u16()):
        raw = reader.take(reader.u32())
        try:
            receipts.append(decode_tsa_receipt(raw))
        except ParameterError as exc:
            raise PacketFormatError(f"embedded receipt malformed: {exc}") from exc
    proofs = []
    for _ in range(reader.u16()):
        digest = reader.take(32)
        anchor_id = reader.take(32)
        anchor_time = reader.u64()
        path = []
        for _ in range(reader.u16()):
            side_code = reader.u8()
            if side_code not in (0, 1):
                raise PacketFormatError(f"bad path side byte {side_code}")
            path.append(("left" if side_code == 0 else "right", reader.take(32)))
        proofs.append(CalendarProof(digest, tuple(path), anchor_id, anchor_time))
    return AnchorSet(tuple(receipts), tuple(proofs), local_claim)


def deserialize(data: bytes) -> EvidencePacket:
    """Parse canonical packet bytes, rejecting malformed input precisely."""
    if len(data) < len(PACKET_MAGIC):
        raise TruncatedPacketError("shorter than the packet magic")
    if not data.startswith(PACKET_MAGIC):
        raise BadMagicError("not a witnessd evidence packet")
    outer = _Reader(data)
    outer.take(len(PACKET_MAGIC))
    version = outer.u16()
    if version != PACKET_VERSION:
        raise UnknownVersionError(f"unsupported packet version {version}")

    sections = []
    for _ in range(7):
        sections.append(_Reader(outer.take(outer.u32())))
    if not outer.done():
        raise TrailingDataError(f"{len(data) - outer.pos} trailing bytes")

    header = _decode_header(sections[0])
    samples = _decode_samples(sections[1])
    checkpoints = _decode_checkpoints(sections[2])
    root = sections[3].take(32)
    leaf_count = sections[3].u64()
    anchors = _decode_anchors(sections[4])
    dual: MatchSummary | None = None
    dual_flag = sections[5].u8()
    if dual_flag == 1:
        dual = MatchSummary(sections[5].u64(), sections[5].u64(), sections[5].u64())
    elif dual_flag != 0:
        raise PacketFormatError(f"bad dual-source presence flag {dual_flag}")
    final_doc = sections[6].take(32)
    for idx, section in enumerate(sections):
        if not section.done():
            raise TrailingDataError(f"section {idx} has trailing bytes")
    return EvidencePacket(
        header=header,
        samples=samples,
        checkpoints=checkpoints,
        mmr_root=root,
        leaf_count=leaf_count,
        anchors=anchors,
        dual_source=dual,
        final_doc_hash=final_doc,
    )


# ---------------------------------------------------------------------------
# Trust configuration and verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrustConfig:
    """Verifier-side trust inputs: TSA signer keys and tolerances."""

    tsa_signers: dict[str, bytes] = field(default_factory=dict)
    max_injected: int = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "TrustConfig":
        payload = json.loads(Path(path).read_text())
        signers = {
            signer_id: bytes.fromhex(key_hex)
            for signer_id, key_hex in payload.get("tsa_signers", {}).items()
        }
        return cls(tsa_signers=signers, max_injected=int(payload.get("max_injected", 0)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "tsa_signers": {k: v.hex() for k, v in self.tsa_signers.items()},
                "max_injected": self.max_injected,
            },
            indent=2,
        )


_ABSENT = "absent"
_ACCEPTED = "accepted"
_REJECTED = "rejected"


@dataclass(frozen=True)
class LayerVerdict:
    layer: str
    status: str
    reason: str | None = None
    location: int | None = None

    @property
    def rejected(self) -> bool:
        return self.status == _REJECTED


@dataclass(frozen=True)
class VerificationReport:
    layers: tuple[LayerVerdict, ...]

    @property
    def accepted(self) -> bool:
        return not any(v.rejected for v in self.layers)

    @property
    def rejected_layers(self) -> tuple[str, ...]:
        return tuple(v.layer for v in self.layers if v.rejected)

    @property
    def absent_layers(self) -> tuple[str, ...]:
        return tuple(v.layer for v in self.layers if v.status == _ABSENT)

    def layer(self, name: str) -> LayerVerdict:
        for verdict in self.layers:
            if verdict.layer == name:
                return verdict
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "layers": [
                {
                    "layer": v.layer,
                    "status": v.status,
                    "reason": v.reason,
                    "location": v.location,
                }
                for v in self.layers
            ],
        }


def _verify_seal_layer(secret: SessionSecret, packet: EvidencePacket) -> LayerVerdict:
    verdict = verify_chain(secret, packet.chain)
    if not verdict:
        return LayerVerdict(LAYER_SEAL, _REJECTED, verdict.reason, verdict.ordinal)
    expected_final = packet.samples[-1].doc_hash if packet.samples else EMPTY_DOC_HASH
    if packet.final_doc_hash != expected_final:
        return LayerVerdict(LAYER_SEAL, _REJECTED, "final-doc-hash-mismatch")
    return LayerVerdict(LAYER_SEAL, _ACCEPTED)


def _verify_vdf_layer(packet: EvidencePacket) -> LayerVerdict:
    if not packet.checkpoints:
        return LayerVerdict(LAYER_VDF, _ABSENT)
    failure = _check_checkpoint_bindings(packet.samples, packet.checkpoints)
    if failure is not None:
        index, reason = failure
        return LayerVerdict(LAYER_VDF, _REJECTED, reason, index)
    for ckpt in packet.checkpoints:
        ok, reason = vdf_mod.verify_checkpoint(ckpt)
        if not ok:
            return LayerVerdict(LAYER_VDF, _REJECTED, reason, ckpt.index)
    return LayerVerdict(LAYER_VDF, _ACCEPTED)


def _verify_mmr_layer(packet: EvidencePacket) -> LayerVerdict:
    root, count = compute_root(packet.samples)
    if packet.leaf_count != count:
        return LayerVerdict(LAYER_MMR, _REJECTED, "leaf-count-mismatch")
    if packet.mmr_root != root:
        return LayerVerdict(LAYER_MMR, _REJECTED, "root-mismatch")
    return LayerVerdict(LAYER_MMR, _ACCEPTED)


def _verify_anchor_layer(packet: EvidencePacket, trust: TrustConfig) -> LayerVerdict:
    anchors = packet.anchors
    if anchors.empty:
        return LayerVerdict(LAYER_ANCHORS, _ABSENT)
    for idx, receipt in enumerate(anchors.receipts):
        request = TsaRequest(packet.mmr_root, receipt.nonce)
        verdict = verify_tsa_receipt(request, receipt, trust.tsa_signers)
        if not verdict:
            return LayerVerdict(LAYER_ANCHORS, _REJECTED, verdict.reason, idx)
    for idx, proof in enumerate(anchors.calendar_proofs):
        if not verify_calendar_proof(packet.mmr_root, proof):
            return LayerVerdict(LAYER_ANCHORS, _REJECTED, "calendar-proof-invalid", idx)
    return LayerVerdict(LAYER_ANCHORS, _ACCEPTED)


def _verify_dual_source_layer(
    packet: EvidencePacket, trust: TrustConfig
) -> LayerVerdict:
    summary = packet.dual_source
    if summary is None:
        return LayerVerdict(LAYER_DUAL_SOURCE, _ABSENT)
    if summary.injected_suspect > trust.max_injected:
        return LayerVerdict(
            LAYER_DUAL_SOURCE, _REJECTED, "injected-events", summary.injected_suspect
        )
    return LayerVerdict(LAYER_DUAL_SOURCE, _ACCEPTED)


def verify_packet(
    secret: SessionSecret,
    packet: EvidencePacket,
    trust: TrustConfig | None = None,
) -> VerificationReport:
    """Verify every layer independently and report per-layer verdicts.

    One layer's failure never masks another's: all five verdicts are always
    computed.  The overall report accepts iff no present layer rejects.
    """
    trust = trust if trust is not None else TrustConfig()
    return VerificationReport(
        layers=(
            _verify_seal_layer(secret, packet),
            _verify_vdf_layer(packet),
            _verify_mmr_layer(packet),
            _verify_anchor_layer(packet, trust),
            _verify_dual_source_layer(packet, trust),
        )
    )


# ---------------------------------------------------------------------------
# JSON export (inspection only)
# ---------------------------------------------------------------------------


def to_json(packet: EvidencePacket, indent: int | None = 2) -> str:
    """One-way JSON rendering for humans; never parsed back."""
    doc = {
        "magic": PACKET_MAGIC.decode("ascii"),
        "version": PACKET_VERSION,
        "header": {
            "session_id": packet.header.session_id.hex(),
            "session_epoch_us": packet.header.session_epoch_us,
            "jitter_min_us": packet.header.params.jitter_min_us,
            "jitter_max_us": packet.header.params.jitter_max_us,
            "sample_interval": packet.header.params.sample_interval,
            "vdf_params_id": packet.header.vdf_params_id,
            "zone_map_version": packet.header.zone_map_version,
            "content_kind": packet.header.content_kind,
            "attestation": packet.header.attestation,
        },
        "samples": [
            {
                "ordinal": s.ordinal,
                "timestamp_us": s.timestamp_us,
                "doc_hash": s.doc_hash.hex(),
                "zone_code": s.zone_code,
                "bucket": s.bucket,
                "jitter_us": s.jitter_us,
                "chain_hash": s.chain_hash.hex(),
            }
            for s in packet.samples
        ],
        "checkpoints": [
            {
                "index": c.index,
                "bound_leaf_count": c.bound_leaf_count,
                "chain_binding": c.chain_binding.hex(),
                "params_id": c.params_id,
                "midpoints": len(c.proof.midpoints),
            }
            for c in packet.checkpoints
        ],
        "mmr_root": packet.mmr_root.hex(),
        "leaf_count": packet.leaf_count,
        "anchors": {
            "local_claim_time_us": packet.anchors.local_claim_time_us,
            "receipts": [
                {
                    "signer_id": r.signer_id,
                    "gen_time_us": r.gen_time_us,
                    "serial": r.serial,
                    "imprint": r.message_imprint.hex(),
                }
                for r in packet.anchors.receipts
            ],
            "calendar_proofs": [
                {
                    "pseudo_anchor_id": p.pseudo_anchor_id.hex(),
                    "anchor_time_us": p.anchor_time_us,
                    "path_len": len(p.path),
                }
                for p in packet.anchors.calendar_proofs
            ],
        },
        "dual_source": (
            None
            if packet.dual_source is None
            else {
                "validated": packet.dual_source.validated,
                "injected_suspect": packet.dual_source.injected_suspect,
                "device_only": packet.dual_source.device_only,
            }
        ),
        "final_doc_hash": packet.final_doc_hash.hex(),
    }
    return json.dumps(doc, indent=indent)
