"""Operator command line: record, verify, attack trials, benchmarks, mock TSA.

Exit codes are a stable contract: 0 success/accept, 1 verification or trial
failure, 2 usage, I/O, or parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .adversary import TrialConfig, run_trials
from .anchors import TSA_URL_ENV, TimestampAuthority, make_tsa_server
from .errors import PacketFormatError, WitnessdError
from .input_model import TimingProfile
from .jitter_seal import SECRET_LEN, SessionSecret
from .packet import TrustConfig, deserialize, serialize, to_json, verify_packet
from .pipeline import record_session
from .report import (
    format_bench_table,
    format_trial_table,
    render_bench_figure,
    render_trial_figure,
    run_benchmarks,
    write_bench_csv,
    write_trial_csv,
    write_trial_json,
)

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _write_secret_file(path: Path, secret: SessionSecret) -> None:
    def _opener(p, flags):
        return os.open(p, flags, 0o600)

    path.unlink(missing_ok=True)
    with open(path, "w", opener=_opener) as fh:
        fh.write(secret.value.hex() + "\n")


def _read_secret_file(path: Path) -> SessionSecret:
    raw = bytes.fromhex(path.read_text().strip())
    if len(raw) != SECRET_LEN:
        raise WitnessdError(f"secret file must hold {SECRET_LEN} hex-encoded bytes")
    return SessionSecret(raw)


def cmd_record(args: argparse.Namespace) -> int:
    try:
        text = Path(args.text).read_text()
    except OSError as exc:
        return _fail(f"cannot read text file: {exc}")
    try:
        profile = TimingProfile.from_file(args.profile) if args.profile else TimingProfile()
    except (OSError, WitnessdError) as exc:
        return _fail(f"cannot load profile: {exc}")

    anchor_url = args.anchor or os.environ.get(TSA_URL_ENV)
    try:
        result = record_session(
            text,
            profile,
            args.seed,
            vdf_params_id=args.vdf,
            checkpoint_interval_us=int(args.checkpoint_interval_ms * 1000),
            anchor_url=anchor_url,
        )
    except WitnessdError as exc:
        return _fail(str(exc))

    out = Path(args.out)
    try:
        out.write_bytes(serialize(result.packet))
        secret_path = out.with_name(out.name + ".secret")
        _write_secret_file(secret_path, result.secret)
        trust_path = None
        if result.trust is not None:
            trust_path = out.with_name(out.name + ".trust.json")
            trust_path.write_text(result.trust.to_json() + "\n")
    except OSError as exc:
        return _fail(f"cannot write outputs: {exc}")

    packet = result.packet
    print(f"packet: {out} ({len(serialize(packet))} bytes)")
    print(f"secret: {secret_path} (mode 0600; required for verification)")
    print(
        f"samples: {len(packet.samples)}  checkpoints: {len(packet.checkpoints)}  "
        f"root: {packet.mmr_root.hex()[:16]}..."
    )
    print(
        f"dual-source: {result.summary.validated} validated, "
        f"{result.summary.injected_suspect} injected-suspect, "
        f"{result.summary.device_only} device-only"
    )
    if anchor_url:
        if result.anchored:
            print(f"anchored via {anchor_url}; trust snippet: {trust_path}")
        else:
            print(f"warning: anchor {anchor_url} unreachable; packet is unanchored",
                  file=sys.stderr)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        data = Path(args.packet).read_bytes()
    except OSError as exc:
        return _fail(f"cannot read packet: {exc}")
    try:
        packet = deserialize(data)
    except PacketFormatError as exc:
        return _fail(f"packet parse failed: {exc}")
    try:
        secret = _read_secret_file(Path(args.secret))
    except (OSError, ValueError, WitnessdError) as exc:
        return _fail(f"cannot load secret: {exc}")
    trust = None
    if args.trust:
        try:
            trust = TrustConfig.from_file(args.trust)
        except (OSError, ValueError, KeyError) as exc:
            return _fail(f"cannot load trust config: {exc}")

    report = verify_packet(secret, packet, trust)
    for verdict in report.layers:
        line = f"  {verdict.layer:<12} {verdict.status}"
        if verdict.reason:
            line += f"  ({verdict.reason}"
            if verdict.location is not None:
                line += f" at {verdict.location}"
            line += ")"
        print(line)
    print(f"overall: {'ACCEPT' if report.accepted else 'REJECT'}")

    if args.report_json:
        import json

        Path(args.report_json).write_text(json.dumps(report.to_dict(), indent=2))
    if args.dump_packet_json:
        Path(args.dump_packet_json).write_text(to_json(packet))
    return EXIT_OK if report.accepted else EXIT_REJECT


def cmd_attack(args: argparse.Namespace) -> int:
    if args.paper_scale:
        config = TrialConfig.paper_scale(
            session_length=args.length, seed=args.seed
        )
    else:
        config = TrialConfig(session_length=args.length, seed=args.seed)
    report = run_trials(
        config, workers=args.workers, collision_trials=args.collision_trials
    )
    print(format_trial_table(report))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trial_csv(report, out_dir / "trials.csv")
    write_trial_json(report, out_dir / "trials.json")
    render_trial_figure(report, out_dir / "trials.png")
    print(f"report written to {out_dir}/ (trials.csv, trials.json, trials.png)")

    return EXIT_OK if report.clean else EXIT_REJECT


def cmd_bench(args: argparse.Namespace) -> int:
    rows = run_benchmarks(quick=args.quick)
    print(format_bench_table(rows))
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_bench_csv(rows, out_dir / "bench.csv")
        render_bench_figure(rows, out_dir / "bench.png")
        print(f"report written to {out_dir}/ (bench.csv, bench.png)")
    return EXIT_OK


def cmd_tsa_serve(args: argparse.Namespace) -> int:
    authority = TimestampAuthority()
    server = make_tsa_server(authority, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"mock TSA listening on http://{host}:{port}")
    print(f"signer id: {authority.signer_id}")
    print(f"public key: {authority.public_key_bytes.hex()}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="witnessd",
        description="Proof-of-process evidence toolkit",
    )
    parser.add_argument("--version", action="version", version=f"witnessd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_record = sub.add_parser("record", help="record a simulated typing session")
    p_record.add_argument("--text", required=True, help="file whose contents are typed")
    p_record.add_argument("--profile", help="timing profile file (key = value lines)")
    p_record.add_argument("--seed", type=int, default=None,
                          help="deterministic seed (reproducible packets)")
    p_record.add_argument("--out", required=True, help="output packet path")
    p_record.add_argument("--anchor", default=None,
                          help=f"TSA base URL (default: ${TSA_URL_ENV})")
    p_record.add_argument("--vdf", choices=["test-256", "default-2048"],
                          default="test-256", help="VDF parameter set for checkpoints")
    p_record.add_argument("--checkpoint-interval-ms", type=float, default=50.0,
                          help="session-time between checkpoints; 0 disables")
    p_record.set_defaults(func=cmd_record)

    p_verify = sub.add_parser("verify", help="verify an evidence packet")
    p_verify.add_argument("--packet", required=True)
    p_verify.add_argument("--secret", required=True, help="hex secret file from record")
    p_verify.add_argument("--trust", help="trust config JSON (TSA signer keys)")
    p_verify.add_argument("--report-json", help="write the machine-readable report here")
    p_verify.add_argument("--dump-packet-json", help="write a JSON rendering of the packet")
    p_verify.set_defaults(func=cmd_verify)

    p_attack = sub.add_parser("attack", help="run the adversarial trial harness")
    p_attack.add_argument("--seed", type=int, default=0)
    p_attack.add_argument("--length", type=int, default=200,
                          help="keystrokes per trial session")
    p_attack.add_argument("--paper-scale", action="store_true",
                          help="run 1000/10000/10000/10000 trials instead of the scaled default")
    p_attack.add_argument("--workers", type=int, default=None,
                          help="process-pool size (default: serial)")
    p_attack.add_argument("--collision-trials", type=int, default=100_000,
                          help="blind-guess probe trials; 0 skips the probe")
    p_attack.add_argument("--out-dir", default="attack-report")
    p_attack.set_defaults(func=cmd_attack)

    p_bench = sub.add_parser("bench", help="benchmark the pipeline primitives")
    p_bench.add_argument("--out-dir", default=None,
                         help="also write bench.csv and bench.png here")
    p_bench.add_argument("--quick", action="store_true",
                         help="fewer iterations (coarser medians)")
    p_bench.set_defaults(func=cmd_bench)

    p_serve = sub.add_parser("tsa-serve", help="run the bundled mock TSA")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8391)
    p_serve.set_defaults(func=cmd_tsa_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
