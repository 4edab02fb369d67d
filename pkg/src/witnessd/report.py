"""Report rendering: tables to stdout, CSV summaries, matplotlib figures.

Attack-trial and benchmark results are written three ways: a human table,
a delimited file for downstream tooling, and a rendered PNG.  Figures use
the Agg backend so report generation works headless.
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .adversary import SCENARIO_VALID, TrialReport
from .evidence_log import MmrState, mmr_append
from .jitter_seal import KeyedJitter, SessionParams, SessionSecret
from .vdf import get_params, hash_to_group, vdf_eval, vdf_prove, vdf_verify


@dataclass(frozen=True)
class BenchRow:
    name: str
    median_ns: float
    detail: str


def _median_rate_ns(fn, calls_per_batch: int, batches: int) -> float:
    rates = []
    for _ in range(batches):
        start = time.perf_counter()
        fn(calls_per_batch)
        elapsed = time.perf_counter() - start
        rates.append(elapsed / calls_per_batch * 1e9)
    return statistics.median(rates)


def run_benchmarks(quick: bool = False) -> list[BenchRow]:
    """Median ns/op for the pipeline's primitive operations."""
    import hashlib
    import random

    rng = random.Random(1)
    params = SessionParams()
    keyed = KeyedJitter(SessionSecret(rng.randbytes(32)), params)
    doc = rng.randbytes(32)

    def jitter_batch(n: int) -> None:
        derive = keyed.derive
        for i in range(n):
            derive(i + 1, doc, i * 1000, 27, 2, 700)

    payload = rng.randbytes(10 * 1024)

    def sha_batch(n: int) -> None:
        digest = hashlib.sha256
        for _ in range(n):
            digest(payload).digest()

    leaves = [rng.randbytes(32) for _ in range(512)]

    def mmr_batch(n: int) -> None:
        state = MmrState.empty()
        for i in range(n):
            state = mmr_append(state, leaves[i % len(leaves)])

    batches = 5 if quick else 9
    scale = 10 if quick else 1
    rows = [
        BenchRow(
            "jitter derivation",
            _median_rate_ns(jitter_batch, 20_000 // scale, batches),
            "keyed HMAC-SHA256 over the 54-byte sample layout",
        ),
        BenchRow(
            "sha256 10KB",
            _median_rate_ns(sha_batch, 5_000 // scale, batches),
            "document-state hash",
        ),
        BenchRow(
            "mmr append",
            _median_rate_ns(mmr_batch, 5_000 // scale, batches),
            "evidence-log append incl. peak merging",
        ),
    ]

    vdf_params = get_params("test-256")
    ckpt_times = []
    for i in range(2 if quick else 3):
        x = hash_to_group(vdf_params, bytes([i]) * 32)
        start = time.perf_counter()
        y = vdf_eval(vdf_params, x)
        proof = vdf_prove(vdf_params, x, y)
        assert vdf_verify(vdf_params, proof)
        ckpt_times.append((time.perf_counter() - start) * 1e9)
    rows.append(
        BenchRow(
            "vdf checkpoint (test-256)",
            statistics.median(ckpt_times),
            f"eval+prove+verify at T=2^{vdf_params.time_T.bit_length() - 1}",
        )
    )
    return rows


def format_bench_table(rows: list[BenchRow]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{'operation'.ljust(width)}  {'median':>14}  notes"]
    for row in rows:
        if row.median_ns < 10_000:
            shown = f"{row.median_ns:,.0f} ns"
        elif row.median_ns < 10_000_000:
            shown = f"{row.median_ns / 1e3:,.1f} us"
        else:
            shown = f"{row.median_ns / 1e6:,.1f} ms"
        lines.append(f"{row.name.ljust(width)}  {shown:>14}  {row.detail}")
    return "\n".join(lines)


def write_bench_csv(rows: list[BenchRow], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["operation", "median_ns", "detail"])
        for row in rows:
            writer.writerow([row.name, f"{row.median_ns:.1f}", row.detail])


def render_bench_figure(rows: list[BenchRow], path: str | Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 0.7 * len(rows) + 1.5))
    names = [r.name for r in rows]
    values = [r.median_ns for r in rows]
    ax.barh(names, values, color="#4878b0")
    ax.set_xscale("log")
    ax.set_xlabel("median ns/op (log scale)")
    ax.set_title("witnessd primitive benchmarks")
    ax.invert_yaxis()
    for i, value in enumerate(values):
        ax.annotate(
            f"{value:,.0f}", (value, i), textcoords="offset points",
            xytext=(4, 0), va="center", fontsize=8,
        )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def format_trial_table(report: TrialReport) -> str:
    width = max(len(name) for name in report.scenarios)
    lines = [f"{'scenario'.ljust(width)}  {'trials':>8}  {'accepts':>8}  {'rejects':>8}"]
    for name, result in report.scenarios.items():
        lines.append(
            f"{name.ljust(width)}  {result.trials:>8}  {result.accepts:>8}  "
            f"{result.rejects:>8}"
        )
    if report.collision_trials:
        lines.append(
            f"\nper-sample blind-guess rate: {report.collision_hits}/"
            f"{report.collision_trials} = {report.collision_rate:.6f}"
        )
    lines.append(f"wall time: {report.wall_time_s:.2f} s (seed {report.seed})")
    return "\n".join(lines)


def write_trial_csv(report: TrialReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "trials", "accepts", "rejects"])
        for name, result in report.scenarios.items():
            writer.writerow([name, result.trials, result.accepts, result.rejects])


def write_trial_json(report: TrialReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2))


def render_trial_figure(report: TrialReport, path: str | Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = list(report.scenarios)
    accepts = [report.scenarios[n].accepts for n in names]
    rejects = [report.scenarios[n].rejects for n in names]
    x = range(len(names))

    fig, ax = plt.subplots(figsize=(7.5, 4))
    ax.bar([i - 0.2 for i in x], accepts, width=0.4, label="accepted", color="#2e7d32")
    ax.bar([i + 0.2 for i in x], rejects, width=0.4, label="rejected", color="#b03030")
    ax.set_xticks(list(x))
    ax.set_xticklabels([n.replace("_", "\n") for n in names], fontsize=9)
    ax.set_ylabel("trials")
    expected = "accept" if SCENARIO_VALID in names else ""
    ax.set_title(
        "verification outcomes by scenario"
        + (f" (honest sessions must {expected})" if expected else "")
    )
    ax.legend()
    for i, (acc, rej) in enumerate(zip(accepts, rejects)):
        ax.annotate(str(acc), (i - 0.2, acc), ha="center", va="bottom", fontsize=8)
        ax.annotate(str(rej), (i + 0.2, rej), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
