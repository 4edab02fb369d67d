"""Zone map, transition/bucket encoders, stream matching, and the simulator."""

import hashlib
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from witnessd.errors import ParameterError, ProfileError, StreamOrderError, UnmappedKeyError
from witnessd.input_model import (
    KEY_BACKSPACE,
    KEY_ENTER,
    KEY_SPACE,
    KeyEvent,
    Origin,
    TimingProfile,
    Verdict,
    ZoneMap,
    default_zone_map,
    encode_zone_transition,
    interval_bucket,
    match_streams,
    simulate_session,
    zone_of_key,
)

ZONES = default_zone_map()


class TestZoneMap:
    def test_every_letter_mapped_exactly_once(self):
        zones = [zone_of_key(ZONES, ch) for ch in string.ascii_lowercase]
        assert all(0 <= z <= 7 for z in zones)

    def test_each_zone_has_three_to_six_letters(self):
        sizes = ZONES.letter_zone_sizes()
        assert set(sizes) == set(range(8))
        assert all(3 <= n <= 6 for n in sizes.values()), sizes

    def test_canonical_assignments(self):
        assert zone_of_key(ZONES, "a") == 0  # left pinky
        assert zone_of_key(ZONES, "j") == 5  # right index
        assert zone_of_key(ZONES, KEY_SPACE) == 4
        assert zone_of_key(ZONES, KEY_ENTER) == 7
        assert zone_of_key(ZONES, KEY_BACKSPACE) == 7

    def test_uppercase_shares_physical_key(self):
        for ch in string.ascii_lowercase:
            assert zone_of_key(ZONES, ch.upper()) == zone_of_key(ZONES, ch)

    def test_digits_and_punctuation_mapped(self):
        for ch in string.digits + string.punctuation:
            assert 0 <= zone_of_key(ZONES, ch) <= 7

    def test_unmapped_control_character(self):
        with pytest.raises(UnmappedKeyError):
            zone_of_key(ZONES, "\x07")

    def test_shifted_symbol_matches_base_key(self):
        assert zone_of_key(ZONES, "!") == zone_of_key(ZONES, "1")
        assert zone_of_key(ZONES, "(") == zone_of_key(ZONES, "9")

    def test_no_key_assigned_twice(self):
        from witnessd.input_model import _LETTER_ZONES, _OTHER_ZONES

        listed = sum(len(keys) for keys in _LETTER_ZONES.values())
        listed += sum(len(keys) for keys in _OTHER_ZONES.values())
        assert len(ZONES.table) == listed


class TestZoneTransition:
    def test_worked_examples(self):
        assert encode_zone_transition(3, 3) == 27
        assert encode_zone_transition(None, 5) == 69
        assert encode_zone_transition(7, 0) == 56

    def test_injective_over_all_pairs(self):
        codes = {encode_zone_transition(p, c) for p in range(8) for c in range(8)}
        codes |= {encode_zone_transition(None, c) for c in range(8)}
        assert len(codes) == 72
        assert all(0 <= code <= 255 for code in codes)

    def test_out_of_range_zones_rejected(self):
        with pytest.raises(ParameterError):
            encode_zone_transition(8, 0)
        with pytest.raises(ParameterError):
            encode_zone_transition(None, 8)


class TestIntervalBucket:
    @pytest.mark.parametrize(
        "delta_us,expected",
        [(120_000, 2), (0, 0), (12_000_000, 9), (49_999, 0), (50_000, 1), (450_000, 9)],
    )
    def test_worked_examples(self, delta_us, expected):
        assert interval_bucket(delta_us) == expected

    def test_negative_delta_rejected(self):
        with pytest.raises(ParameterError):
            interval_bucket(-1)

    @given(a=st.integers(min_value=0, max_value=1 << 40), b=st.integers(min_value=0, max_value=1 << 40))
    @settings(max_examples=300, deadline=None)
    def test_monotone_and_saturating(self, a, b):
        lo, hi = sorted((a, b))
        assert interval_bucket(lo) <= interval_bucket(hi) <= 9


def ev(ts, key, origin):
    return KeyEvent(ts, key, origin)


class TestMatchStreams:
    def test_pair_within_ten_ms_validates(self):
        app = [ev(110_000, "a", Origin.APPLICATION)]
        dev = [ev(100_000, "a", Origin.DEVICE)]
        events, summary = match_streams(app, dev)
        assert summary.validated == 1
        assert events[0].verdict is Verdict.VALIDATED
        assert events[0].timestamp_us == 100_000  # device timestamp wins

    def test_application_only_event_is_suspect(self):
        app = [ev(100_000, "a", Origin.APPLICATION), ev(150_000, "x", Origin.APPLICATION)]
        dev = [ev(99_000, "a", Origin.DEVICE)]
        events, summary = match_streams(app, dev)
        assert summary.injected_suspect == 1
        suspects = [e for e in events if e.verdict is Verdict.INJECTED_SUSPECT]
        assert len(suspects) == 1
        assert (suspects[0].key, suspects[0].timestamp_us) == ("x", 150_000)

    def test_device_only_event(self):
        events, summary = match_streams([], [ev(1, "q", Origin.DEVICE)])
        assert summary.device_only == 1
        assert events[0].verdict is Verdict.DEVICE_ONLY

    def test_outside_window_does_not_match(self):
        app = [ev(200_000, "a", Origin.APPLICATION)]
        dev = [ev(100_000, "a", Origin.DEVICE)]
        _, summary = match_streams(app, dev, window_us=50_000)
        assert summary.validated == 0
        assert summary.injected_suspect == 1
        assert summary.device_only == 1

    def test_key_identity_required(self):
        app = [ev(100_000, "b", Origin.APPLICATION)]
        dev = [ev(100_000, "a", Origin.DEVICE)]
        _, summary = match_streams(app, dev)
        assert summary.validated == 0

    def test_one_to_one_matching(self):
        app = [ev(100_000, "a", Origin.APPLICATION)]
        dev = [ev(99_000, "a", Origin.DEVICE), ev(101_000, "a", Origin.DEVICE)]
        _, summary = match_streams(app, dev)
        assert summary.validated == 1
        assert summary.device_only == 1

    def test_earliest_first_greedy(self):
        app = [ev(90_000, "a", Origin.APPLICATION), ev(110_000, "a", Origin.APPLICATION)]
        dev = [ev(100_000, "a", Origin.DEVICE)]
        events, summary = match_streams(app, dev)
        assert summary.validated == 1
        suspect = [e for e in events if e.verdict is Verdict.INJECTED_SUSPECT][0]
        assert suspect.timestamp_us == 110_000  # the earlier candidate matched

    def test_unsorted_stream_rejected(self):
        bad = [ev(2, "a", Origin.APPLICATION), ev(1, "b", Origin.APPLICATION)]
        with pytest.raises(StreamOrderError):
            match_streams(bad, [])
        with pytest.raises(StreamOrderError):
            match_streams([], bad)

    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_count_identities(self, data):
        keys = "abc"
        app = sorted(
            data.draw(
                st.lists(
                    st.tuples(st.integers(0, 500_000), st.sampled_from(keys)),
                    max_size=30,
                )
            )
        )
        dev = sorted(
            data.draw(
                st.lists(
                    st.tuples(st.integers(0, 500_000), st.sampled_from(keys)),
                    max_size=30,
                )
            )
        )
        app_events = [ev(t, k, Origin.APPLICATION) for t, k in app]
        dev_events = [ev(t, k, Origin.DEVICE) for t, k in dev]
        _, summary = match_streams(app_events, dev_events)
        assert summary.validated <= min(len(app_events), len(dev_events))
        assert summary.validated + summary.injected_suspect == len(app_events)
        assert summary.validated + summary.device_only == len(dev_events)


class TestTimingProfile:
    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "typing.profile"
        path.write_text(
            "# steady typist\n"
            "mean_interval_ms = 140\n"
            "stddev_ms = 22.5\n"
            "injection_rate = 0.05\n"
            "lead_ms_min = 1\n"
            "lead_ms_max = 6\n"
        )
        profile = TimingProfile.from_file(path)
        assert profile.mean_interval_ms == 140
        assert profile.stddev_ms == 22.5
        assert profile.injection_rate == 0.05
        assert (profile.lead_ms_min, profile.lead_ms_max) == (1, 6)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.profile"
        path.write_text("typing_speed = 9\n")
        with pytest.raises(ProfileError):
            TimingProfile.from_file(path)

    def test_bad_number_rejected(self, tmp_path):
        path = tmp_path / "bad.profile"
        path.write_text("mean_interval_ms = fast\n")
        with pytest.raises(ProfileError):
            TimingProfile.from_file(path)

    def test_invalid_values_rejected(self):
        with pytest.raises(ProfileError):
            TimingProfile(mean_interval_ms=0)
        with pytest.raises(ProfileError):
            TimingProfile(injection_rate=1.5)
        with pytest.raises(ProfileError):
            TimingProfile(lead_ms_min=9, lead_ms_max=2)


class TestSimulateSession:
    def test_hello_all_validate(self):
        sim = simulate_session("hello", TimingProfile(), seed=1)
        events, summary = match_streams(sim.app_events, sim.dev_events)
        assert summary.validated == 5
        assert summary.injected_suspect == 0
        assert summary.device_only == 0

    def test_device_leads_application(self):
        sim = simulate_session("abcdef" * 10, TimingProfile(), seed=2)
        reals = [e for e in sim.app_events]
        assert len(reals) == len(sim.dev_events)
        for dev_event, app_event in zip(sim.dev_events, sorted(reals, key=lambda e: e.timestamp_us)):
            lead = app_event.timestamp_us - dev_event.timestamp_us
            assert 1_000 <= lead <= 8_000

    def test_doc_hashes_are_prefix_hashes(self):
        text = "prefix hashing"
        sim = simulate_session(text, TimingProfile(), seed=3)
        for k, digest in enumerate(sim.doc_hashes):
            assert digest == hashlib.sha256(text[: k + 1].encode()).digest()

    def test_same_seed_identical_streams(self):
        a = simulate_session("determinism", TimingProfile(injection_rate=0.2), seed=9)
        b = simulate_session("determinism", TimingProfile(injection_rate=0.2), seed=9)
        assert a == b

    def test_injection_count_is_seeded(self):
        profile = TimingProfile(injection_rate=0.1)
        text = "x" * 100
        first = simulate_session(text, profile, seed=4)
        injected = len(first.app_events) - len(first.dev_events)
        assert injected > 0
        _, summary = match_streams(first.app_events, first.dev_events)
        assert summary.injected_suspect == injected
        again = simulate_session(text, profile, seed=4)
        assert len(again.app_events) - len(again.dev_events) == injected

    def test_empty_text_empty_streams(self):
        sim = simulate_session("", TimingProfile(), seed=5)
        assert sim.app_events == () and sim.dev_events == () and sim.doc_hashes == ()

    def test_full_validation_at_default_window(self):
        # Leads of 1-8 ms sit far inside the 50 ms window.
        for seed in range(10):
            sim = simulate_session("the rain in spain " * 5, TimingProfile(), seed=seed)
            _, summary = match_streams(sim.app_events, sim.dev_events)
            assert summary.validated == len(sim.dev_events)
