"""MMR hashing rules, peak laws, inclusion proofs, and persistence."""

import hashlib
import random

import pytest

from witnessd.errors import EmptyLogError, LogFormatError, ParameterError
from witnessd.evidence_log import (
    MMR_FILE_MAGIC,
    InclusionProof,
    LeafRecord,
    MmrLog,
    MmrState,
    leaf_hash,
    mmr_append,
    mmr_prove,
    mmr_root,
    mmr_verify,
    node_hash,
)


def oracle_leaf(content, metadata):
    return hashlib.sha256(b"\x00" + content + metadata).digest()


def oracle_node(left, right):
    return hashlib.sha256(b"\x01" + left + right).digest()


def oracle_bag(left, right):
    return hashlib.sha256(b"\x02" + left + right).digest()


def build(leaves):
    state = MmrState.empty()
    for leaf in leaves:
        state = mmr_append(state, leaf)
    return state


def random_leaves(rng, n):
    return [rng.randbytes(32) for _ in range(n)]


class TestLeafHash:
    def test_zero_record_frozen_value(self):
        # SHA-256 of 0x00 followed by 64 zero bytes, from a standalone tool.
        record = LeafRecord(bytes(32), bytes(32))
        assert leaf_hash(record).hex() == (
            "98ce42deef51d40269d542f5314bef2c7468d401ad5d85168bfab4c0108f75f7"
        )

    def test_matches_oracle(self):
        rng = random.Random(1)
        for _ in range(50):
            content, metadata = rng.randbytes(32), rng.randbytes(32)
            assert leaf_hash(LeafRecord(content, metadata)) == oracle_leaf(content, metadata)

    def test_metadata_changes_hash(self):
        a = LeafRecord(bytes(32), bytes(32))
        b = LeafRecord(bytes(32), b"\x01" + bytes(31))
        assert leaf_hash(a) != leaf_hash(b)

    def test_deterministic(self):
        record = LeafRecord(b"\x05" * 32, b"\x06" * 32)
        assert leaf_hash(record) == leaf_hash(record)

    def test_field_width_enforced(self):
        with pytest.raises(ParameterError):
            LeafRecord(bytes(31), bytes(32))

    def test_domain_separation_of_hash_uses(self):
        left, right = b"\x0c" * 32, b"\x0d" * 32
        as_leaf = leaf_hash(LeafRecord(left, right))
        as_node = node_hash(left, right)
        as_bag = oracle_bag(left, right)
        assert len({as_leaf, as_node, as_bag}) == 3


class TestAppend:
    def test_single_leaf_single_peak(self):
        leaf = b"\x11" * 32
        state = build([leaf])
        assert state.leaf_count == 1
        assert state.peaks == ((0, leaf),)

    def test_two_leaves_merge(self):
        l1, l2 = b"\x01" * 32, b"\x02" * 32
        state = build([l1, l2])
        assert state.peaks == ((1, oracle_node(l1, l2)),)

    def test_three_leaves_two_peaks(self):
        state = build(random_leaves(random.Random(2), 3))
        assert [h for h, _ in state.peaks] == [1, 0]

    def test_prior_states_unchanged(self):
        rng = random.Random(3)
        state = MmrState.empty()
        snapshots = []
        for leaf in random_leaves(rng, 20):
            snapshots.append(state)
            state = mmr_append(state, leaf)
        # earlier snapshots still hold their original peaks
        assert snapshots[5].leaf_count == 5
        assert snapshots[10].peaks != state.peaks

    def test_peak_count_equals_popcount(self):
        rng = random.Random(4)
        state = MmrState.empty()
        for count in range(1, 600):
            state = mmr_append(state, rng.randbytes(32))
            assert len(state.peaks) == bin(count).count("1")
            heights = [h for h, _ in state.peaks]
            assert heights == sorted(heights, reverse=True)
            assert len(set(heights)) == len(heights)


class TestRoot:
    def test_single_leaf_root_is_leaf(self):
        leaf = b"\x0a" * 32
        assert mmr_root(build([leaf])) == leaf

    def test_two_leaf_root_is_peak(self):
        l1, l2 = b"\x01" * 32, b"\x02" * 32
        assert mmr_root(build([l1, l2])) == oracle_node(l1, l2)

    def test_three_leaf_root_frozen_and_oracle(self):
        l1 = oracle_leaf(bytes(32), bytes(32))
        l2 = oracle_leaf(b"\x01" * 32, bytes(32))
        l3 = oracle_leaf(b"\x02" * 32, bytes(32))
        root = mmr_root(build([l1, l2, l3]))
        assert root == oracle_bag(oracle_node(l1, l2), l3)
        assert root.hex() == (
            "57af7fded8520f7215d12b7054d1d7276634ec902d183617b1378acbaa221c80"
        )

    def test_bagging_right_to_left(self):
        rng = random.Random(5)
        leaves = random_leaves(rng, 7)  # peaks at heights 2, 1, 0
        state = build(leaves)
        p2, p1, p0 = [h for _, h in state.peaks]
        assert mmr_root(state) == oracle_bag(p2, oracle_bag(p1, p0))

    def test_empty_log_errors(self):
        with pytest.raises(EmptyLogError):
            mmr_root(MmrState.empty())

    def test_append_only_history_reproducible(self):
        rng = random.Random(6)
        leaves = random_leaves(rng, 64)
        roots = []
        state = MmrState.empty()
        for leaf in leaves:
            state = mmr_append(state, leaf)
            roots.append(mmr_root(state))
        for n in (1, 7, 32, 64):
            assert mmr_root(build(leaves[:n])) == roots[n - 1]


class TestInclusionProofs:
    def test_all_indices_verify(self):
        rng = random.Random(7)
        for count in (1, 2, 3, 5, 8, 13, 64, 100):
            leaves = random_leaves(rng, count)
            state = build(leaves)
            root = mmr_root(state)
            for index in range(count):
                proof = mmr_prove(state, leaves, index)
                assert mmr_verify(root, leaves[index], proof), (count, index)

    def test_wrong_leaf_rejected(self):
        rng = random.Random(8)
        leaves = random_leaves(rng, 16)
        state = build(leaves)
        root = mmr_root(state)
        proof = mmr_prove(state, leaves, 5)
        assert not mmr_verify(root, leaves[6], proof)

    def test_index_out_of_range(self):
        rng = random.Random(9)
        leaves = random_leaves(rng, 4)
        state = build(leaves)
        with pytest.raises(ParameterError):
            mmr_prove(state, leaves, 4)

    def test_leaf_list_must_match_state(self):
        rng = random.Random(10)
        leaves = random_leaves(rng, 4)
        state = build(leaves)
        with pytest.raises(ParameterError):
            mmr_prove(state, leaves[:3], 0)

    def test_random_mutations_rejected(self):
        rng = random.Random(11)
        leaves = random_leaves(rng, 37)
        state = build(leaves)
        root = mmr_root(state)
        rejected = 0
        for _ in range(1000):
            index = rng.randrange(len(leaves))
            proof = mmr_prove(state, leaves, index)
            leaf = leaves[index]
            target = rng.randrange(3)
            if target == 0 and proof.path:
                k = rng.randrange(len(proof.path))
                side, sibling = proof.path[k]
                flipped = bytearray(sibling)
                flipped[rng.randrange(32)] ^= 1 << rng.randrange(8)
                path = list(proof.path)
                path[k] = (side, bytes(flipped))
                proof = InclusionProof(proof.leaf_index, tuple(path), proof.peaks_left, proof.peaks_right)
            elif target == 1:
                flipped = bytearray(leaf)
                flipped[rng.randrange(32)] ^= 1 << rng.randrange(8)
                leaf = bytes(flipped)
            else:
                flipped = bytearray(root)
                flipped[rng.randrange(32)] ^= 1 << rng.randrange(8)
                assert not mmr_verify(bytes(flipped), leaf, proof)
                rejected += 1
                continue
            assert not mmr_verify(root, leaf, proof)
            rejected += 1
        assert rejected == 1000


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "evidence.mmr"
        rng = random.Random(12)
        log = MmrLog(path)
        records = [LeafRecord(rng.randbytes(32), rng.randbytes(32)) for _ in range(9)]
        for record in records:
            log.append(record)
        reopened = MmrLog(path)
        assert reopened.records == tuple(records)
        assert reopened.state == log.state
        assert mmr_root(reopened.state) == mmr_root(log.state)

    def test_magic_written(self, tmp_path):
        path = tmp_path / "evidence.mmr"
        MmrLog(path)
        assert path.read_bytes() == MMR_FILE_MAGIC

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "evidence.mmr"
        path.write_bytes(b"NOTMAGIC" + bytes(64))
        with pytest.raises(LogFormatError):
            MmrLog(path)

    def test_truncated_record_rejected(self, tmp_path):
        path = tmp_path / "evidence.mmr"
        log = MmrLog(path)
        log.append(LeafRecord(bytes(32), bytes(32)))
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(LogFormatError):
            MmrLog(path)
