"""Keyboard zones, interval buckets, dual-source matching, session simulation.

The zone map partitions the keyboard into 8 regions loosely following
touch-typing finger assignments; a keystroke is characterised by the ordered
zone transition from its predecessor and by a quantised inter-key interval,
so sealed evidence captures typing rhythm without recording which key was
pressed (each zone covers several keys).

Dual-source matching pairs application-level events against device-level
events: software-injected keystrokes show up only in the application stream.
A deterministic session simulator stands in for OS capture hooks.
"""

from __future__ import annotations

import hashlib
import random
import string
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import ParameterError, ProfileError, StreamOrderError, UnmappedKeyError

ZONE_MAP_VERSION = "qwerty-v1"
ZONE_COUNT = 8
FIRST_KEY_BASE = 64  # zone codes 64..71 mark "no previous key"

BUCKET_WIDTH_US = 50_000
BUCKET_MAX = 9

DEFAULT_MATCH_WINDOW_US = 50_000

KEY_SPACE = " "
KEY_ENTER = "\n"
KEY_BACKSPACE = "\x08"
KEY_TAB = "\t"

# Canonical QWERTY zone table (version "qwerty-v1").  Home- and top-row
# letters follow standard finger assignments; the inner columns (t g y h)
# form a centre zone shared with the thumb, and the bottom-row strays are
# grouped with their nearest neighbours so that every zone keeps 3-6 letters.
# Zones: 0 left pinky, 1 left ring, 2 left middle, 3 left index,
# 4 centre/thumb, 5 right index, 6 right middle, 7 right outer.
_LETTER_ZONES = {
    0: "qaz",
    1: "wsx",
    2: "edc",
    3: "rfv",
    4: "tgyh",
    5: "ujnb",
    6: "ikm",
    7: "olp",
}

# Remaining printable keys by physical column; shifted symbols share their
# base key's zone.
_OTHER_ZONES = {
    0: "1!`~\t",
    1: "2@",
    2: "3#",
    3: "4$",
    4: "5%6^ ",
    5: "7&",
    6: "8*,<",
    7: "9(0)-_=+[{]}\\|;:'\".>/?\n\x08",
}


def _build_qwerty_table() -> dict[str, int]:
    table: dict[str, int] = {}
    for zone, keys in _LETTER_ZONES.items():
        for ch in keys:
            table[ch] = zone
    for zone, keys in _OTHER_ZONES.items():
        for ch in keys:
            table[ch] = zone
    return table


@dataclass(frozen=True)
class ZoneMap:
    """Mapping from key identifiers to zone indices in [0, 7]."""

    table: dict[str, int]
    version: str = ZONE_MAP_VERSION

    @classmethod
    def qwerty(cls) -> "ZoneMap":
        return cls(table=_build_qwerty_table())

    def letter_zone_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {z: 0 for z in range(ZONE_COUNT)}
        for key, zone in self.table.items():
            if key in string.ascii_lowercase:
                sizes[zone] += 1
        return sizes


_DEFAULT_MAP = ZoneMap.qwerty()


def default_zone_map() -> ZoneMap:
    return _DEFAULT_MAP


def zone_of_key(zone_map: ZoneMap, key: str) -> int:
    """Look up a key's zone; uppercase letters share their base key's zone."""
    zone = zone_map.table.get(key)
    if zone is None and len(key) == 1:
        zone = zone_map.table.get(key.lower())
    if zone is None:
        raise UnmappedKeyError(key)
    return zone


def encode_zone_transition(prev_zone: int | None, cur_zone: int) -> int:
    """One-byte ordered transition code: prev*8 + cur, or 64 + cur at start."""
    if not 0 <= cur_zone < ZONE_COUNT:
        raise ParameterError(f"zone {cur_zone} out of range")
    if prev_zone is None:
        return FIRST_KEY_BASE + cur_zone
    if not 0 <= prev_zone < ZONE_COUNT:
        raise ParameterError(f"zone {prev_zone} out of range")
    return prev_zone * ZONE_COUNT + cur_zone


def interval_bucket(delta_us: int) -> int:
    """Quantise an inter-keystroke gap: floor(delta / 50 ms) clamped to 9."""
    if delta_us < 0:
        raise ParameterError("inter-keystroke delta must be non-negative")
    return min(delta_us // BUCKET_WIDTH_US, BUCKET_MAX)


class Origin(Enum):
    APPLICATION = "application"
    DEVICE = "device"


class Verdict(Enum):
    VALIDATED = "validated"
    INJECTED_SUSPECT = "injected_suspect"
    DEVICE_ONLY = "device_only"


@dataclass(frozen=True)
class KeyEvent:
    timestamp_us: int
    key: str
    origin: Origin


@dataclass(frozen=True)
class ValidatedEvent:
    timestamp_us: int
    key: str
    verdict: Verdict


@dataclass(frozen=True)
class MatchSummary:
    validated: int
    injected_suspect: int
    device_only: int


_VERDICT_ORDER = {Verdict.VALIDATED: 0, Verdict.INJECTED_SUSPECT: 1, Verdict.DEVICE_ONLY: 2}


def _check_sorted(events, name: str) -> None:
    prev = None
    for ev in events:
        if prev is not None and ev.timestamp_us < prev:
            raise StreamOrderError(f"{name} stream is not time-ordered")
        prev = ev.timestamp_us


def match_streams(
    app,
    dev,
    window_us: int = DEFAULT_MATCH_WINDOW_US,
) -> tuple[list[ValidatedEvent], MatchSummary]:
    """Greedy earliest-first one-to-one matching of the two event streams.

    A device event pairs with the earliest unmatched application event that
    carries the same key identifier within ``window_us``.  Matched pairs are
    validated (at the device timestamp), application-only leftovers are
    flagged injected_suspect, device-only leftovers device_only.
    """
    app = list(app)
    dev = list(dev)
    _check_sorted(app, "application")
    _check_sorted(dev, "device")

    pending: dict[str, deque[int]] = defaultdict(deque)
    for idx, ev in enumerate(app):
        pending[ev.key].append(idx)

    matched: set[int] = set()
    out: list[ValidatedEvent] = []
    for ev in dev:
        queue = pending.get(ev.key)
        paired = False
        while queue:
            idx = queue[0]
            if app[idx].timestamp_us < ev.timestamp_us - window_us:
                queue.popleft()  # too old for this and every later device event
                continue
            if app[idx].timestamp_us <= ev.timestamp_us + window_us:
                queue.popleft()
                matched.add(idx)
                out.append(ValidatedEvent(ev.timestamp_us, ev.key, Verdict.VALIDATED))
                paired = True
            break
        if not paired:
            out.append(ValidatedEvent(ev.timestamp_us, ev.key, Verdict.DEVICE_ONLY))
    for idx, ev in enumerate(app):
        if idx not in matched:
            out.append(ValidatedEvent(ev.timestamp_us, ev.key, Verdict.INJECTED_SUSPECT))

    out.sort(key=lambda e: (e.timestamp_us, _VERDICT_ORDER[e.verdict], e.key))
    validated = len(matched)
    summary = MatchSummary(
        validated=validated,
        injected_suspect=len(app) - validated,
        device_only=len(dev) - validated,
    )
    return out, summary


@dataclass(frozen=True)
class TimingProfile:
    """Inter-key timing model for the session simulator."""

    mean_interval_ms: float = 150.0
    stddev_ms: float = 30.0
    injection_rate: float = 0.0
    lead_ms_min: float = 1.0
    lead_ms_max: float = 8.0

    def __post_init__(self) -> None:
        if self.mean_interval_ms <= 0:
            raise ProfileError("mean_interval_ms must be positive")
        if self.stddev_ms < 0:
            raise ProfileError("stddev_ms must be non-negative")
        if not 0.0 <= self.injection_rate <= 1.0:
            raise ProfileError("injection_rate must be in [0, 1]")
        if not 0.0 <= self.lead_ms_min <= self.lead_ms_max:
            raise ProfileError("lead window must satisfy 0 <= min <= max")

    @classmethod
    def from_file(cls, path: str | Path) -> "TimingProfile":
        """Parse a ``key = value`` profile file; '#' starts a comment."""
        values: dict[str, float] = {}
        known = {
            "mean_interval_ms", "stddev_ms", "injection_rate",
            "lead_ms_min", "lead_ms_max",
        }
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ProfileError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ProfileError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = float(raw.strip())
            except ValueError as exc:
                raise ProfileError(f"{path}:{lineno}: bad number {raw.strip()!r}") from exc
        return cls(**values)


@dataclass(frozen=True)
class SimulatedSession:
    app_events: tuple[KeyEvent, ...]
    dev_events: tuple[KeyEvent, ...]
    doc_hashes: tuple[bytes, ...]


_INJECTION_KEYS = string.ascii_lowercase


def simulate_session(
    text: str,
    profile: TimingProfile,
    seed: int | random.Random,
) -> SimulatedSession:
    """Deterministically simulate typing ``text`` under a timing profile.

    Device events carry hardware timestamps; the matching application event
    follows after a uniform lead in [lead_ms_min, lead_ms_max].  With a
    non-zero injection rate, extra application-only events (random letter
    keys) appear between real keystrokes.  The k-th document hash is the
    SHA-256 of the first k characters.
    """
    rng = random.Random(seed) if isinstance(seed, int) else seed
    dev: list[KeyEvent] = []
    app: list[KeyEvent] = []
    hashes: list[bytes] = []
    t = 0
    for k, ch in enumerate(text):
        gap_ms = max(1.0, rng.gauss(profile.mean_interval_ms, profile.stddev_ms))
        t += int(gap_ms * 1000)
        dev.append(KeyEvent(t, ch, Origin.DEVICE))
        lead_us = int(rng.uniform(profile.lead_ms_min, profile.lead_ms_max) * 1000)
        app.append(KeyEvent(t + lead_us, ch, Origin.APPLICATION))
        hashes.append(hashlib.sha256(text[: k + 1].encode("utf-8")).digest())
        if profile.injection_rate > 0 and rng.random() < profile.injection_rate:
            offset_us = int(rng.uniform(0, profile.mean_interval_ms) * 1000)
            app.append(
                KeyEvent(t + offset_us, rng.choice(_INJECTION_KEYS), Origin.APPLICATION)
            )
    app.sort(key=lambda e: e.timestamp_us)
    return SimulatedSession(tuple(app), tuple(dev), tuple(hashes))
