"""End-to-end recording: simulate, validate, seal, log, checkpoint, anchor.

This is the orchestration the CLI drives.  A deterministic seed makes the
whole packet reproducible byte for byte (secret, session id, epoch, and
nonces all derive from the seeded generator); without a seed, secrets come
from the operating system CSPRNG and the epoch from the wall clock.
"""

from __future__ import annotations

import bisect
import logging
import random
import secrets as _secrets
import time
import urllib.error
from dataclasses import dataclass

from .anchors import AnchorSet, TsaClient, build_tsa_request
from .errors import UnmappedKeyError, WitnessdError
from .evidence_log import MmrState, leaf_hash, mmr_append, mmr_root
from .input_model import (
    MatchSummary,
    TimingProfile,
    ValidatedEvent,
    Verdict,
    ZoneMap,
    default_zone_map,
    encode_zone_transition,
    interval_bucket,
    match_streams,
    simulate_session,
    zone_of_key,
)
from .jitter_seal import (
    GENESIS_HASH,
    KeyedJitter,
    SealChain,
    SessionParams,
    SessionSecret,
    seal_keystroke,
    setup,
)
from .packet import (
    ZERO_ROOT,
    EvidencePacket,
    PacketHeader,
    TrustConfig,
    assemble_packet,
    sample_leaf_record,
)
from .vdf import make_checkpoint

logger = logging.getLogger(__name__)

DEFAULT_CHECKPOINT_INTERVAL_US = 50_000
DEFAULT_VDF_PARAMS_ID = "test-256"

# Epoch used when recording under a fixed seed, so packets are reproducible.
SEEDED_EPOCH_US = 1_700_000_000_000_000


@dataclass(frozen=True)
class RecordResult:
    packet: EvidencePacket
    secret: SessionSecret
    summary: MatchSummary
    anchored: bool
    trust: TrustConfig | None


def seal_validated_events(
    chain: SealChain,
    secret: SessionSecret,
    events: list[ValidatedEvent],
    doc_hashes,
    zone_map: ZoneMap | None = None,
    *,
    strict_keys: bool = False,
) -> SealChain:
    """Seal the validated keystrokes of a session into ``chain``.

    Zone transitions and interval buckets are computed over consecutive
    validated keystrokes (including ones the sampling interval skips); the
    k-th validated keystroke binds the k-th document hash.  Unmapped keys
    are skipped unless ``strict_keys`` is set, and the transition context
    resets across such a gap.
    """
    zone_map = zone_map if zone_map is not None else default_zone_map()
    keyed = KeyedJitter(secret, chain.params)
    interval = chain.params.sample_interval
    prev_zone: int | None = None
    prev_ts: int | None = None
    keystroke_index = 0
    for event, doc_hash in zip(
        (e for e in events if e.verdict is Verdict.VALIDATED), doc_hashes
    ):
        try:
            zone = zone_of_key(zone_map, event.key)
        except UnmappedKeyError:
            if strict_keys:
                raise
            keystroke_index += 1
            prev_zone = None
            prev_ts = event.timestamp_us
            continue
        code = encode_zone_transition(prev_zone, zone)
        delta = 0 if prev_ts is None else event.timestamp_us - prev_ts
        bucket = interval_bucket(delta)
        if keystroke_index % interval == 0:
            seal_keystroke(
                chain, secret, event.timestamp_us, doc_hash, code, bucket, keyed=keyed
            )
        keystroke_index += 1
        prev_zone = zone
        prev_ts = event.timestamp_us
    return chain


def checkpoint_schedule(timestamps: list[int], interval_us: int) -> list[tuple[int, int]]:
    """(checkpoint index, bound prefix length) pairs over the session clock.

    A checkpoint fires at every multiple of ``interval_us`` up to the last
    keystroke; it binds the samples with timestamps at or before its tick.
    """
    if interval_us <= 0 or not timestamps:
        return []
    schedule = []
    last = timestamps[-1]
    index = 0
    tick = interval_us
    while tick <= last:
        schedule.append((index, bisect.bisect_right(timestamps, tick)))
        index += 1
        tick += interval_us
    return schedule


def record_session(
    text: str,
    profile: TimingProfile | None = None,
    seed: int | None = None,
    *,
    params: SessionParams | None = None,
    vdf_params_id: str = DEFAULT_VDF_PARAMS_ID,
    checkpoint_interval_us: int = DEFAULT_CHECKPOINT_INTERVAL_US,
    anchor_url: str | None = None,
    content_kind: str = "text/plain",
    zone_map: ZoneMap | None = None,
) -> RecordResult:
    """Record one simulated typing session into a verifiable packet.

    ``checkpoint_interval_us <= 0`` disables VDF checkpoints;
    ``vdf_params_id`` selects the registry entry they use.  When
    ``anchor_url`` is set, the packet root is stamped by that TSA; an
    unreachable authority degrades to an unanchored packet with a warning.
    """
    rng = random.Random(seed) if seed is not None else None
    secret, session_params = setup(rng, params)
    session_id = rng.randbytes(16) if rng is not None else _secrets.token_bytes(16)
    epoch_us = SEEDED_EPOCH_US if seed is not None else time.time_ns() // 1000

    sim = simulate_session(
        text,
        profile if profile is not None else TimingProfile(),
        rng if rng is not None else random.Random(),
    )
    events, summary = match_streams(sim.app_events, sim.dev_events)

    chain = SealChain(params=session_params, session_id=session_id)
    seal_validated_events(chain, secret, events, sim.doc_hashes, zone_map)

    log_state = MmrState.empty()
    prefix_states = [log_state]
    for sample in chain.samples:
        log_state = mmr_append(log_state, leaf_hash(sample_leaf_record(sample)))
        prefix_states.append(log_state)

    checkpoints = []
    if vdf_params_id and checkpoint_interval_us > 0:
        timestamps = [s.timestamp_us for s in chain.samples]
        for index, prefix_len in checkpoint_schedule(timestamps, checkpoint_interval_us):
            state = prefix_states[prefix_len]
            root = mmr_root(state) if state.leaf_count else ZERO_ROOT
            last_hash = chain.samples[prefix_len - 1].chain_hash if prefix_len else GENESIS_HASH
            checkpoints.append(
                make_checkpoint(index, prefix_len, root, last_hash, vdf_params_id)
            )

    final_root = mmr_root(log_state) if log_state.leaf_count else ZERO_ROOT
    local_claim_us = epoch_us + (chain.samples[-1].timestamp_us if chain.samples else 0)

    receipts: tuple = ()
    trust: TrustConfig | None = None
    anchored = False
    if anchor_url:
        client = TsaClient(anchor_url)
        request = build_tsa_request(final_root, rng)
        try:
            receipt = client.stamp(request)
            signer_id, signer_key = client.fetch_signer()
            receipts = (receipt,)
            trust = TrustConfig(tsa_signers={signer_id: signer_key})
            anchored = True
        except (urllib.error.URLError, OSError, WitnessdError) as exc:
            logger.warning(
                "anchor %s unreachable, packet left unanchored: %s", anchor_url, exc
            )

    anchors = AnchorSet(
        receipts=receipts, calendar_proofs=(), local_claim_time_us=local_claim_us
    )
    header = PacketHeader(
        session_id=session_id,
        session_epoch_us=epoch_us,
        params=session_params,
        vdf_params_id=vdf_params_id if checkpoints else "",
        zone_map_version=(zone_map or default_zone_map()).version,
        content_kind=content_kind,
    )
    packet = assemble_packet(chain, checkpoints, log_state, anchors, summary, header)
    return RecordResult(packet, secret, summary, anchored, trust)
