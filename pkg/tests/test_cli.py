"""Exit-code contract and file outputs of the command-line interface."""

import json
import subprocess
import sys

import pytest

from witnessd.anchors import TimestampAuthority, start_tsa_server
from witnessd.packet import deserialize, serialize

SAMPLE_TEXT = "evidence of typing, sealed keystroke by keystroke.\n"


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "witnessd", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        timeout=600,
    )


@pytest.fixture()
def workspace(tmp_path):
    text = tmp_path / "draft.txt"
    text.write_text(SAMPLE_TEXT)
    return tmp_path


def record(workspace, *extra, seed="7", name="evidence.pkt"):
    out = workspace / name
    result = run_cli(
        "record", "--text", str(workspace / "draft.txt"),
        "--seed", seed, "--out", str(out), *extra,
    )
    return result, out


class TestRecord:
    def test_record_writes_packet_and_secret(self, workspace):
        result, out = record(workspace)
        assert result.returncode == 0, result.stderr
        assert out.exists()
        secret = out.with_name(out.name + ".secret")
        assert secret.exists()
        assert (secret.stat().st_mode & 0o777) == 0o600
        bytes.fromhex(secret.read_text().strip())

    def test_seed_reproducibility(self, workspace):
        _, first = record(workspace, name="a.pkt")
        _, second = record(workspace, name="b.pkt")
        assert first.read_bytes() == second.read_bytes()

    def test_kilobyte_text_reproducible(self, workspace):
        (workspace / "draft.txt").write_text((SAMPLE_TEXT * 21)[:1024])
        args = ("--checkpoint-interval-ms", "0")  # keep the long session quick
        _, first = record(workspace, *args, name="kb-a.pkt")
        _, second = record(workspace, *args, name="kb-b.pkt")
        assert first.read_bytes() == second.read_bytes()
        assert len(first.read_bytes()) > 1024

    def test_missing_text_file_exits_2(self, workspace):
        result = run_cli(
            "record", "--text", str(workspace / "absent.txt"),
            "--out", str(workspace / "x.pkt"),
        )
        assert result.returncode == 2
        assert "cannot read" in result.stderr

    def test_empty_text_is_valid(self, workspace):
        (workspace / "draft.txt").write_text("")
        result, out = record(workspace)
        assert result.returncode == 0
        verify = run_cli(
            "verify", "--packet", str(out),
            "--secret", str(out) + ".secret",
        )
        assert verify.returncode == 0

    def test_unknown_flag_exits_2(self, workspace):
        result = run_cli("record", "--nope")
        assert result.returncode == 2
        assert "usage" in result.stderr.lower()

    def test_bad_profile_exits_2(self, workspace):
        profile = workspace / "weird.profile"
        profile.write_text("words_per_minute = 60\n")
        result = run_cli(
            "record", "--text", str(workspace / "draft.txt"),
            "--profile", str(profile), "--out", str(workspace / "x.pkt"),
        )
        assert result.returncode == 2

    def test_unreachable_anchor_warns_but_succeeds(self, workspace):
        result, out = record(workspace, "--anchor", "http://127.0.0.1:1")
        assert result.returncode == 0
        assert "unanchored" in result.stderr
        assert out.exists()


class TestVerify:
    def test_honest_packet_accepts(self, workspace):
        _, out = record(workspace)
        result = run_cli(
            "verify", "--packet", str(out), "--secret", str(out) + ".secret",
        )
        assert result.returncode == 0
        assert "overall: ACCEPT" in result.stdout

    def test_tampered_packet_rejects_with_layer(self, workspace):
        _, out = record(workspace)
        packet = deserialize(out.read_bytes())
        import dataclasses

        sample = packet.samples[3]
        samples = list(packet.samples)
        samples[3] = dataclasses.replace(sample, jitter_us=sample.jitter_us ^ 1)
        out.write_bytes(serialize(dataclasses.replace(packet, samples=tuple(samples))))
        result = run_cli(
            "verify", "--packet", str(out), "--secret", str(out) + ".secret",
        )
        assert result.returncode == 1
        assert "overall: REJECT" in result.stdout
        assert "seal" in result.stdout and "rejected" in result.stdout

    def test_wrong_secret_rejects(self, workspace):
        _, out = record(workspace)
        bad = out.with_name("bad.secret")
        bad.write_text("11" * 32 + "\n")
        result = run_cli("verify", "--packet", str(out), "--secret", str(bad))
        assert result.returncode == 1
        assert "seal" in result.stdout

    def test_corrupt_packet_exits_2(self, workspace):
        _, out = record(workspace)
        out.write_bytes(out.read_bytes()[:40])
        result = run_cli(
            "verify", "--packet", str(out), "--secret", str(out) + ".secret",
        )
        assert result.returncode == 2
        assert "parse failed" in result.stderr

    def test_bad_magic_exits_2(self, workspace):
        _, out = record(workspace)
        data = bytearray(out.read_bytes())
        data[:8] = b"AAAAAAAA"
        out.write_bytes(bytes(data))
        result = run_cli(
            "verify", "--packet", str(out), "--secret", str(out) + ".secret",
        )
        assert result.returncode == 2

    def test_report_json_written(self, workspace):
        _, out = record(workspace)
        report_path = workspace / "report.json"
        result = run_cli(
            "verify", "--packet", str(out), "--secret", str(out) + ".secret",
            "--report-json", str(report_path),
        )
        assert result.returncode == 0
        doc = json.loads(report_path.read_text())
        assert doc["accepted"] is True
        assert {layer["layer"] for layer in doc["layers"]} == {
            "seal", "vdf", "mmr", "anchors", "dual_source",
        }

    def test_packet_json_dump(self, workspace):
        _, out = record(workspace)
        dump_path = workspace / "packet.json"
        result = run_cli(
            "verify", "--packet", str(out), "--secret", str(out) + ".secret",
            "--dump-packet-json", str(dump_path),
        )
        assert result.returncode == 0
        doc = json.loads(dump_path.read_text())
        assert doc["magic"] == "WTNSPKT1"
        assert doc["header"]["jitter_min_us"] == 500
        assert len(doc["samples"]) == len(SAMPLE_TEXT)


class TestAnchoredFlow:
    def test_record_and_verify_with_trust(self, workspace):
        authority = TimestampAuthority()
        server, _, url = start_tsa_server(authority)
        try:
            result, out = record(workspace, "--anchor", url, name="anchored.pkt")
            assert result.returncode == 0, result.stderr
            trust = str(out) + ".trust.json"
            verify = run_cli(
                "verify", "--packet", str(out), "--secret", str(out) + ".secret",
                "--trust", trust,
            )
            assert verify.returncode == 0
            assert "anchors" in verify.stdout
            missing_trust = run_cli(
                "verify", "--packet", str(out), "--secret", str(out) + ".secret",
            )
            assert missing_trust.returncode == 1
            assert "unknown-signer" in missing_trust.stdout
        finally:
            server.shutdown()
            server.server_close()

    def test_env_var_overrides_anchor(self, workspace, monkeypatch):
        authority = TimestampAuthority()
        server, _, url = start_tsa_server(authority)
        try:
            out = workspace / "env.pkt"
            result = subprocess.run(
                [sys.executable, "-m", "witnessd", "record",
                 "--text", str(workspace / "draft.txt"),
                 "--seed", "7", "--out", str(out)],
                capture_output=True, text=True, timeout=600,
                env={**__import__("os").environ, "WITNESSD_TSA_URL": url},
            )
            assert result.returncode == 0, result.stderr
            assert "anchored via" in result.stdout
        finally:
            server.shutdown()
            server.server_close()


class TestAttackAndBench:
    def test_attack_writes_reports(self, workspace):
        out_dir = workspace / "attack-out"
        result = run_cli(
            "attack", "--seed", "3", "--length", "12",
            "--collision-trials", "5000", "--out-dir", str(out_dir),
        )
        assert result.returncode == 0, result.stderr
        assert (out_dir / "trials.csv").exists()
        assert (out_dir / "trials.json").exists()
        assert (out_dir / "trials.png").exists()
        doc = json.loads((out_dir / "trials.json").read_text())
        assert doc["scenarios"]["valid"]["accepts"] == doc["scenarios"]["valid"]["trials"]
        assert all(
            doc["scenarios"][name]["accepts"] == 0
            for name in ("fabricated_jitter", "mismatched_doc", "wrong_secret")
        )

    def test_bench_quick_with_outputs(self, workspace):
        out_dir = workspace / "bench-out"
        result = run_cli("bench", "--quick", "--out-dir", str(out_dir))
        assert result.returncode == 0, result.stderr
        assert "jitter derivation" in result.stdout
        assert (out_dir / "bench.csv").exists()
        assert (out_dir / "bench.png").exists()
