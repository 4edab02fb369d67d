"""Attack-trial harness: honest baselines against three forgery scenarios.

Scenario generators:
  valid             honest simulated session, verified with its own secret
  fabricated_jitter every jitter replaced by a fresh in-range value, chain
                    hashes recomputed so only the keyed derivation can fail
  mismatched_doc    all document hashes swapped for another document's, chain
                    hashes recomputed so only the keyed derivation can fail
  wrong_secret      honest evidence verified under a different secret

Trials are independent and deterministic per (seed, scenario, index); a
process pool may run them concurrently since results aggregate by index.
The collision probe measures the per-sample blind-guess rate directly.
"""

from __future__ import annotations

import hashlib
import random
import string
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import ParameterError
from .input_model import TimingProfile, match_streams, simulate_session
from .jitter_seal import (
    KeyedJitter,
    SealChain,
    SessionParams,
    SessionSecret,
    chain_hash,
    verify_chain,
)
from .pipeline import seal_validated_events

SCENARIO_VALID = "valid"
SCENARIO_FABRICATED_JITTER = "fabricated_jitter"
SCENARIO_MISMATCHED_DOC = "mismatched_doc"
SCENARIO_WRONG_SECRET = "wrong_secret"
SCENARIOS = (
    SCENARIO_VALID,
    SCENARIO_FABRICATED_JITTER,
    SCENARIO_MISMATCHED_DOC,
    SCENARIO_WRONG_SECRET,
)

_QUIET_PROFILE = TimingProfile(mean_interval_ms=120.0, stddev_ms=25.0)


@dataclass(frozen=True)
class TrialConfig:
    valid_trials: int = 100
    fabricated_trials: int = 1000
    mismatched_trials: int = 1000
    wrong_secret_trials: int = 1000
    session_length: int = 200
    seed: int = 0
    params: SessionParams = field(default_factory=SessionParams)

    def __post_init__(self) -> None:
        for count in (
            self.valid_trials,
            self.fabricated_trials,
            self.mismatched_trials,
            self.wrong_secret_trials,
        ):
            if count < 1:
                raise ParameterError("every scenario needs at least one trial")
        if self.session_length < 2:
            raise ParameterError("session_length must be at least 2 keystrokes")

    def scenario_trials(self) -> dict[str, int]:
        return {
            SCENARIO_VALID: self.valid_trials,
            SCENARIO_FABRICATED_JITTER: self.fabricated_trials,
            SCENARIO_MISMATCHED_DOC: self.mismatched_trials,
            SCENARIO_WRONG_SECRET: self.wrong_secret_trials,
        }

    @classmethod
    def paper_scale(cls, **kwargs) -> "TrialConfig":
        kwargs.setdefault("valid_trials", 1000)
        kwargs.setdefault("fabricated_trials", 10_000)
        kwargs.setdefault("mismatched_trials", 10_000)
        kwargs.setdefault("wrong_secret_trials", 10_000)
        return cls(**kwargs)


@dataclass(frozen=True)
class ScenarioResult:
    trials: int
    accepts: int
    rejects: int


@dataclass(frozen=True)
class TrialReport:
    scenarios: dict[str, ScenarioResult]
    collision_hits: int
    collision_trials: int
    wall_time_s: float
    seed: int

    @property
    def collision_rate(self) -> float | None:
        if not self.collision_trials:
            return None
        return self.collision_hits / self.collision_trials

    @property
    def clean(self) -> bool:
        """True when every honest trial accepted and every attack rejected."""
        honest = self.scenarios[SCENARIO_VALID]
        if honest.accepts != honest.trials:
            return False
        return all(
            self.scenarios[name].accepts == 0
            for name in SCENARIOS
            if name != SCENARIO_VALID
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            "collision_hits": self.collision_hits,
            "collision_trials": self.collision_trials,
            "collision_rate": self.collision_rate,
            "scenarios": {
                name: {"trials": r.trials, "accepts": r.accepts, "rejects": r.rejects}
                for name, r in self.scenarios.items()
            },
        }


def _trial_seed(seed: int, scenario: str, index: int) -> int:
    material = b"witnessd-trial" + scenario.encode("ascii") + struct.pack(">QQ", seed, index)
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


def _honest_session(
    rng: random.Random, length: int, params: SessionParams
) -> tuple[SessionSecret, SealChain, str]:
    text = "".join(rng.choice(string.ascii_lowercase) for _ in range(length))
    secret = SessionSecret(rng.randbytes(32))
    sim = simulate_session(text, _QUIET_PROFILE, rng)
    events, _ = match_streams(sim.app_events, sim.dev_events)
    chain = SealChain(params=params, session_id=rng.randbytes(16))
    seal_validated_events(chain, secret, events, sim.doc_hashes)
    return secret, chain, text


def _rechain(chain: SealChain) -> SealChain:
    """Recompute chain hashes over the (possibly doctored) recorded fields."""
    prev = bytes(32)
    fixed = []
    for s in chain.samples:
        linked = replace(
            s, chain_hash=chain_hash(s.ordinal, s.timestamp_us, s.doc_hash, s.jitter_us, prev)
        )
        fixed.append(linked)
        prev = linked.chain_hash
    return SealChain(params=chain.params, session_id=chain.session_id, samples=fixed)


def run_one_trial(
    scenario: str, seed: int, index: int, length: int, params: SessionParams
) -> bool:
    """Run a single trial; returns True when verification accepted."""
    rng = random.Random(_trial_seed(seed, scenario, index))
    secret, chain, text = _honest_session(rng, length, params)

    if scenario == SCENARIO_VALID:
        return bool(verify_chain(secret, chain))

    if scenario == SCENARIO_FABRICATED_JITTER:
        forged = [
            replace(
                s,
                jitter_us=rng.randrange(params.jitter_min_us, params.jitter_max_us),
            )
            for s in chain.samples
        ]
        doctored = _rechain(
            SealChain(params=params, session_id=chain.session_id, samples=forged)
        )
        return bool(verify_chain(secret, doctored))

    if scenario == SCENARIO_MISMATCHED_DOC:
        other = "".join(rng.choice(string.ascii_lowercase) for _ in range(len(text)))
        swapped = [
            replace(
                s, doc_hash=hashlib.sha256(other[: k + 1].encode("utf-8")).digest()
            )
            for k, s in enumerate(chain.samples)
        ]
        doctored = _rechain(
            SealChain(params=params, session_id=chain.session_id, samples=swapped)
        )
        return bool(verify_chain(secret, doctored))

    if scenario == SCENARIO_WRONG_SECRET:
        other_secret = SessionSecret(rng.randbytes(32))
        return bool(verify_chain(other_secret, chain))

    raise ParameterError(f"unknown scenario {scenario!r}")


def _run_chunk(args: tuple[str, int, int, int, int, tuple[int, int, int]]) -> tuple[str, int]:
    scenario, seed, start, stop, length, params_tuple = args
    params = SessionParams(*params_tuple)
    accepts = 0
    for index in range(start, stop):
        if run_one_trial(scenario, seed, index, length, params):
            accepts += 1
    return scenario, accepts


def collision_probe(
    trials: int, seed: int = 0, params: SessionParams | None = None
) -> tuple[int, int]:
    """Blind single-sample jitter guessing: (hits, trials).

    Each trial derives the true jitter for random inputs under a hidden
    secret, then guesses uniformly in range; the hit rate estimates 1/R.
    """
    params = params if params is not None else SessionParams()
    rng = random.Random(_trial_seed(seed, "collision-probe", 0))
    keyed = KeyedJitter(SessionSecret(rng.randbytes(32)), params)
    hits = 0
    jmin, jmax = params.jitter_min_us, params.jitter_max_us
    randrange = rng.randrange
    randbytes = rng.randbytes
    for index in range(trials):
        true_jitter = keyed.derive(
            index + 1,
            randbytes(32),
            randrange(1 << 40),
            randrange(72),
            randrange(10),
            randrange(jmin, jmax),
        )
        if randrange(jmin, jmax) == true_jitter:
            hits += 1
    return hits, trials


def run_trials(
    config: TrialConfig,
    workers: int | None = None,
    collision_trials: int = 0,
    chunk_size: int = 64,
) -> TrialReport:
    """Execute all scenarios, optionally on a process pool.

    Aggregation is order-independent (counts per scenario), so pooled and
    sequential runs produce identical reports for the same seed.
    """
    started = time.perf_counter()
    params_tuple = (
        config.params.jitter_min_us,
        config.params.jitter_max_us,
        config.params.sample_interval,
    )
    chunks = []
    for scenario, total in config.scenario_trials().items():
        for start in range(0, total, chunk_size):
            chunks.append(
                (
                    scenario,
                    config.seed,
                    start,
                    min(start + chunk_size, total),
                    config.session_length,
                    params_tuple,
                )
            )

    accepts = {name: 0 for name in SCENARIOS}
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for scenario, count in pool.map(_run_chunk, chunks):
                accepts[scenario] += count
    else:
        for chunk in chunks:
            scenario, count = _run_chunk(chunk)
            accepts[scenario] += count

    hits = 0
    if collision_trials:
        hits, collision_trials = collision_probe(
            collision_trials, config.seed, config.params
        )

    scenarios = {
        name: ScenarioResult(
            trials=total, accepts=accepts[name], rejects=total - accepts[name]
        )
        for name, total in config.scenario_trials().items()
    }
    return TrialReport(
        scenarios=scenarios,
        collision_hits=hits,
        collision_trials=collision_trials,
        wall_time_s=time.perf_counter() - started,
        seed=config.seed,
    )
