"""Shared builders for packet-level tests."""

import random

import pytest

from witnessd.anchors import AnchorSet, TimestampAuthority, build_tsa_request, decode_tsa_receipt, encode_tsa_request
from witnessd.evidence_log import MmrState, leaf_hash, mmr_append, mmr_root
from witnessd.input_model import MatchSummary
from witnessd.jitter_seal import GENESIS_HASH, SealChain, seal_keystroke, setup
from witnessd.packet import (
    ZERO_ROOT,
    PacketHeader,
    TrustConfig,
    assemble_packet,
    sample_leaf_record,
)
from witnessd.vdf import make_checkpoint


def build_chain(rng, secret, params, n):
    chain = SealChain(params=params, session_id=rng.randbytes(16))
    ts = 0
    for _ in range(n):
        ts += rng.randrange(20_000, 200_000)
        seal_keystroke(
            chain, secret, ts, rng.randbytes(32), rng.randrange(72), rng.randrange(10)
        )
    return chain


def log_state_for(chain):
    state = MmrState.empty()
    for sample in chain.samples:
        state = mmr_append(state, leaf_hash(sample_leaf_record(sample)))
    return state


def build_packet(
    seed=1,
    n=6,
    with_checkpoint=True,
    with_anchor=True,
    with_dual=True,
    with_calendar=False,
    authority=None,
    vdf_params_id="test-256",
):
    """Assemble a fully populated valid packet plus its secret and trust."""
    rng = random.Random(seed)
    secret, params = setup(rng)
    chain = build_chain(rng, secret, params, n)
    state = log_state_for(chain)

    checkpoints = []
    if with_checkpoint and n >= 2:
        for index, bound in enumerate((1, n)):
            prefix = chain.samples[:bound]
            prefix_state = MmrState.empty()
            for sample in prefix:
                prefix_state = mmr_append(prefix_state, leaf_hash(sample_leaf_record(sample)))
            root = mmr_root(prefix_state) if prefix else ZERO_ROOT
            last = prefix[-1].chain_hash if prefix else GENESIS_HASH
            checkpoints.append(make_checkpoint(index, bound, root, last, vdf_params_id))

    final_root = mmr_root(state) if state.leaf_count else ZERO_ROOT
    receipts = ()
    trust = TrustConfig()
    if with_anchor:
        authority = authority or TimestampAuthority(clock=lambda: 7_777_777)
        request = build_tsa_request(final_root, rng)
        receipts = (decode_tsa_receipt(authority.stamp(encode_tsa_request(request))),)
        trust = TrustConfig(tsa_signers={authority.signer_id: authority.public_key_bytes})

    calendar_proofs = ()
    if with_calendar:
        from witnessd.anchors import CalendarAggregator

        aggregator = CalendarAggregator(clock=lambda: 6_000_000)
        handle = aggregator.submit(final_root)
        for _ in range(rng.randrange(4)):
            aggregator.submit(rng.randbytes(32))
        calendar_proofs = (aggregator.finalize()[handle],)

    dual = MatchSummary(n, 0, 0) if with_dual else None
    anchors = AnchorSet(receipts, calendar_proofs, local_claim_time_us=5_000_000)
    header = PacketHeader(
        session_id=chain.session_id,
        session_epoch_us=1_000_000,
        params=params,
        vdf_params_id=vdf_params_id if checkpoints else "",
    )
    packet = assemble_packet(chain, checkpoints, state, anchors, dual, header)
    return packet, secret, trust


@pytest.fixture()
def full_packet():
    return build_packet(seed=11)
