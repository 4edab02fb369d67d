"""Append-only Merkle Mountain Range over evidence leaves.

Leaves commit to a (content_hash, metadata_hash) pair under the 0x00 domain
prefix; internal nodes use 0x01 and the root bagging fold uses 0x02, so the
three hash uses cannot collide by construction.  Appending never mutates an
existing peak, which is what makes the log tamper-evident: rewriting any
leaf forces recomputation of every node above and to the right of it.

The log persists as a flat file of fixed-width leaf records; peaks are
rebuilt on open.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyLogError, LogFormatError, ParameterError

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"
BAG_PREFIX = b"\x02"

MMR_FILE_MAGIC = b"WTNSMMR1"
_RECORD = struct.Struct(">32s32s")


@dataclass(frozen=True)
class LeafRecord:
    content_hash: bytes
    metadata_hash: bytes

    def __post_init__(self) -> None:
        if len(self.content_hash) != 32 or len(self.metadata_hash) != 32:
            raise ParameterError("leaf record fields must be 32 bytes each")


def leaf_hash(record: LeafRecord) -> bytes:
    """SHA-256 over 0x00 || content_hash || metadata_hash."""
    return hashlib.sha256(LEAF_PREFIX + record.content_hash + record.metadata_hash).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(NODE_PREFIX + left + right).digest()


@dataclass(frozen=True)
class MmrState:
    """Immutable snapshot: leaf count plus peaks ordered by falling height."""

    leaf_count: int
    peaks: tuple[tuple[int, bytes], ...]

    @classmethod
    def empty(cls) -> "MmrState":
        return cls(0, ())


def mmr_append(state: MmrState, leaf: bytes) -> MmrState:
    """Add one leaf hash, merging equal-height peaks bottom-up."""
    peaks = list(state.peaks)
    height, carry = 0, leaf
    while peaks and peaks[-1][0] == height:
        prev_height, prev_hash = peaks.pop()
        carry = node_hash(prev_hash, carry)
        height += 1
    peaks.append((height, carry))
    return MmrState(state.leaf_count + 1, tuple(peaks))


def mmr_root(state: MmrState) -> bytes:
    """Bag the peaks right-to-left; a single peak is the root itself."""
    if state.leaf_count == 0:
        raise EmptyLogError("cannot take the root of an empty log")
    acc = state.peaks[-1][1]
    for _, peak in reversed(state.peaks[:-1]):
        acc = hashlib.sha256(BAG_PREFIX + peak + acc).digest()
    return acc


@dataclass(frozen=True)
class InclusionProof:
    """Path from a leaf to its peak plus the other peaks for re-bagging."""

    leaf_index: int
    path: tuple[tuple[str, bytes], ...]  # (sibling side: "left"|"right", hash)
    peaks_left: tuple[bytes, ...]
    peaks_right: tuple[bytes, ...]


def _subtree_sizes(leaf_count: int) -> list[int]:
    sizes = []
    bit = 1 << leaf_count.bit_length()
    while bit:
        if leaf_count & bit:
            sizes.append(bit)
        bit >>= 1
    return sizes


def _subtree_hash(leaves, start: int, size: int) -> bytes:
    if size == 1:
        return leaves[start]
    half = size // 2
    return node_hash(
        _subtree_hash(leaves, start, half),
        _subtree_hash(leaves, start + half, half),
    )


def mmr_prove(state: MmrState, leaves, leaf_index: int) -> InclusionProof:
    """Build the inclusion proof for ``leaf_index`` from the full leaf list."""
    leaves = list(leaves)
    if len(leaves) != state.leaf_count:
        raise ParameterError(
            f"leaf list length {len(leaves)} does not match state {state.leaf_count}"
        )
    if not 0 <= leaf_index < state.leaf_count:
        raise ParameterError(f"leaf index {leaf_index} out of range")

    peaks_left: list[bytes] = []
    peaks_right: list[bytes] = []
    path: list[tuple[str, bytes]] = []
    start = 0
    target_seen = False
    for size in _subtree_sizes(state.leaf_count):
        end = start + size
        if start <= leaf_index < end:
            lo, hi = start, end
            while hi - lo > 1:
                half = (hi - lo) // 2
                mid = lo + half
                if leaf_index < mid:
                    path.append(("right", _subtree_hash(leaves, mid, half)))
                    hi = mid
                else:
                    path.append(("left", _subtree_hash(leaves, lo, half)))
                    lo = mid
            path.reverse()  # verification climbs leaf -> peak
            target_seen = True
        elif target_seen:
            peaks_right.append(_subtree_hash(leaves, start, size))
        else:
            peaks_left.append(_subtree_hash(leaves, start, size))
        start = end
    return InclusionProof(leaf_index, tuple(path), tuple(peaks_left), tuple(peaks_right))


def mmr_verify(root: bytes, leaf: bytes, proof: InclusionProof) -> bool:
    """Recompute up the path, re-bag the peaks, compare against ``root``."""
    acc = leaf
    for side, sibling in proof.path:
        if side == "left":
            acc = node_hash(sibling, acc)
        elif side == "right":
            acc = node_hash(acc, sibling)
        else:
            return False
    peaks = list(proof.peaks_left) + [acc] + list(proof.peaks_right)
    bagged = peaks[-1]
    for peak in reversed(peaks[:-1]):
        bagged = hashlib.sha256(BAG_PREFIX + peak + bagged).digest()
    return bagged == root


class MmrLog:
    """Persistent append-only leaf store backing an in-memory MMR.

    The file starts with the 8-byte magic and holds 64-byte records
    (content_hash || metadata_hash).  Opening rebuilds peaks from the
    records; a file whose length is not magic + k*64 is rejected.
    """

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._records: list[LeafRecord] = []
        self._state = MmrState.empty()
        if self._path.exists():
            self._load()
        else:
            self._path.write_bytes(MMR_FILE_MAGIC)

    def _load(self) -> None:
        data = self._path.read_bytes()
        if len(data) < len(MMR_FILE_MAGIC) or not data.startswith(MMR_FILE_MAGIC):
            raise LogFormatError(f"{self._path}: bad or missing log magic")
        body = data[len(MMR_FILE_MAGIC):]
        if len(body) % _RECORD.size != 0:
            raise LogFormatError(f"{self._path}: truncated trailing record")
        state = MmrState.empty()
        for offset in range(0, len(body), _RECORD.size):
            content, metadata = _RECORD.unpack_from(body, offset)
            record = LeafRecord(content, metadata)
            self._records.append(record)
            state = mmr_append(state, leaf_hash(record))
        self._state = state

    @property
    def state(self) -> MmrState:
        return self._state

    @property
    def records(self) -> tuple[LeafRecord, ...]:
        return tuple(self._records)

    def leaf_hashes(self) -> list[bytes]:
        return [leaf_hash(r) for r in self._records]

    def append(self, record: LeafRecord) -> MmrState:
        with self._path.open("ab") as fh:
            fh.write(_RECORD.pack(record.content_hash, record.metadata_hash))
        self._records.append(record)
        self._state = mmr_append(self._state, leaf_hash(record))
        return self._state
