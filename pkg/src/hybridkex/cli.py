"""Command-line entry point.

Exit codes: 0 success, 1 runtime error (including handshake aborts),
2 verification failure (``bench --check``), 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import socket
import sys
import threading
from pathlib import Path

from . import __version__
from .errors import HybridKexError, UnknownSuiteError

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CHECK_FAILED = 2
EXIT_USAGE = 64

LOG_ENV = "HYBRIDKEX_LOG"
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("hybridkex")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hybridkex", description="Hybrid ECDH + PQ KEM + QKD key establishment toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", choices=sorted(LOG_LEVELS), default=None,
                   help=f"logging verbosity (default: ${LOG_ENV} or warn)")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("suites", help="list the registered hybrid suites")
    s.add_argument("--json", action="store_true", help="emit the registry as JSON")

    s = sub.add_parser("keygen", help="generate a dual Ed25519 + ML-DSA-65 keypair")
    s.add_argument("--out", required=True, metavar="PREFIX",
                   help="write PREFIX.key (private, mode 0600) and PREFIX.pub")
    s.add_argument("--hex", action="store_true", help="print a hex dump of the public key file")

    for name, help_ in (("serve", "accept handshakes as the responder"),
                        ("connect", "run one handshake as the initiator")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, metavar="JSON", help="handshake config file")
        s.add_argument("--address", metavar="HOST:PORT", help="override the config's address")
        s.add_argument("--suite", metavar="LABEL", help="override the config's suite")
        if name == "serve":
            s.add_argument("--max-sessions", type=int, default=None, metavar="N",
                           help="exit after N sessions (default: serve forever)")
        else:
            s.add_argument("--message", default="hello over a hybrid channel",
                           help="test message to send through the record layer")

    s = sub.add_parser("qkd-sim", help="run the mock ETSI QKD 014 KME")
    s.add_argument("--config", required=True, metavar="JSON", help="KME config file")
    s.add_argument("--listen", metavar="HOST:PORT", help="override the config's listen_addr")

    s = sub.add_parser("bench", help="benchmark the key exchange of each suite")
    s.add_argument("--iters", type=int, default=100, metavar="N", help="timed iterations per suite (>= 2)")
    s.add_argument("--warmup", type=int, default=10, metavar="N", help="untimed warmup iterations")
    s.add_argument("--mtu", type=int, default=1500, metavar="M", help="packet payload size")
    s.add_argument("--suite", action="append", default=[], metavar="LABEL", help="restrict to a suite (repeatable)")
    s.add_argument("--format", choices=("table", "csv", "json"), default="table", help="report format")
    s.add_argument("--out", metavar="FILE", help="write the report to FILE instead of stdout")
    s.add_argument("--check", action="store_true",
                   help="only verify byte/packet/strength accounting against the embedded table (exit 2 on mismatch)")

    s = sub.add_parser("report", help="re-render a JSON bench report")
    s.add_argument("--in", dest="input", required=True, metavar="FILE", help="JSON written by bench --format json")
    s.add_argument("--format", choices=("table", "csv", "json"), default="table", help="report format")
    s.add_argument("--out", metavar="FILE", help="write to FILE instead of stdout")
    return p


def _setup_logging(level: str | None) -> None:
    name = level or os.environ.get(LOG_ENV, "warn").lower()
    if name not in LOG_LEVELS:
        raise UsageError(f"{LOG_ENV} must be one of {sorted(LOG_LEVELS)}, got {name!r}")
    logging.basicConfig(level=LOG_LEVELS[name], stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


# -- suites -------------------------------------------------------------------


def cmd_suites(args) -> int:
    from .bench import DEFAULT_MTU, suite_accounting
    from .suites import list_suites

    entries = []
    for s in list_suites():
        total, packets, _ = suite_accounting(s, DEFAULT_MTU)
        entries.append({
            "label": s.label,
            "id": s.id,
            "classical": s.classical.name.value,
            "pq": s.pq.name.value,
            "bytes_total": total,
            "packets": packets,
            "strength_pqc": s.strength_pqc_bits,
            "strength_classical": s.strength_classical_bits,
        })
    if args.json:
        _emit(json.dumps(entries, indent=2) + "\n", None)
    else:
        lines = [f"{e['id']:>2}  {e['label']:<34} {e['classical']:<7} {e['pq']:<15} "
                 f"{e['bytes_total']:>7} B {e['packets']:>4} pkts  {e['strength_pqc']}/{e['strength_classical']} bits"
                 for e in entries]
        _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


# -- keygen -------------------------------------------------------------------


def cmd_keygen(args) -> int:
    import hashlib

    from .dual_sig import dual_keygen
    from .handshake.keyfile import encode_verifying, write_key_file

    kp = dual_keygen()
    key_path, pub_path = Path(f"{args.out}.key"), Path(f"{args.out}.pub")
    write_key_file(key_path, kp)
    write_key_file(pub_path, kp.verifying)
    pub_bytes = encode_verifying(kp.verifying)
    print(f"wrote {key_path} (private) and {pub_path} (public)")
    print(f"public key fingerprint: {hashlib.sha256(pub_bytes).hexdigest()}")
    if args.hex:
        print(pub_bytes.hex())
    return EXIT_OK


# -- handshake config -----------------------------------------------------------


def _hex_field(obj: dict, key: str, where: str) -> bytes:
    try:
        return bytes.fromhex(obj[key])
    except KeyError:
        raise UsageError(f"{where} is missing {key!r}") from None
    except (TypeError, ValueError):
        raise UsageError(f"{where}.{key} is not valid hex") from None


def load_handshake_config(path: str, role: str, address: str | None = None, suite: str | None = None):
    """Build a HandshakeConfig from JSON; explicit arguments win over the file."""
    from .dual_sig import DualKeypair, VerifyingKeys
    from .handshake.keyfile import read_key_file
    from .handshake.protocol import EtsiQkdLink, HandshakeConfig
    from .qkd.client import KmeClient
    from .suites import get_suite

    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    base = Path(path).parent

    known = {"suite", "role", "address", "keypair", "keypair_file", "peer_verifying",
             "peer_verifying_file", "qkd"}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    if raw.get("role", role) != role:
        raise UsageError(f"config role {raw['role']!r} does not match command role {role!r}")

    if "keypair_file" in raw:
        kp = read_key_file(base / raw["keypair_file"])
        if not isinstance(kp, DualKeypair):
            raise UsageError("keypair_file does not hold a private dual keypair")
    elif "keypair" in raw:
        k = raw["keypair"]
        kp = DualKeypair(*(_hex_field(k, n, "keypair") for n in
                           ("classical_signing", "classical_verifying", "pq_signing", "pq_verifying")))
    else:
        raise UsageError("config needs 'keypair' or 'keypair_file'")

    if "peer_verifying_file" in raw:
        peer = read_key_file(base / raw["peer_verifying_file"])
        if isinstance(peer, DualKeypair):
            peer = peer.verifying
    elif "peer_verifying" in raw:
        v = raw["peer_verifying"]
        peer = VerifyingKeys(_hex_field(v, "classical", "peer_verifying"), _hex_field(v, "pq", "peer_verifying"))
    else:
        raise UsageError("config needs 'peer_verifying' or 'peer_verifying_file'")

    qkd = None
    if raw.get("qkd"):
        q = raw["qkd"]
        try:
            qkd = EtsiQkdLink(KmeClient(q["kme_endpoint"]), q["sae_id"], q["peer_sae_id"])
        except KeyError as exc:
            raise UsageError(f"qkd config missing {exc}") from None

    suite_key = suite or raw.get("suite")
    if not suite_key:
        raise UsageError("no suite given (config 'suite' or --suite)")
    addr = address or raw.get("address")
    if not addr:
        raise UsageError("no address given (config 'address' or --address)")
    return HandshakeConfig(get_suite(suite_key), role, kp, peer, qkd, addr)


def _describe(exc: Exception) -> str:
    from .errors import AuthenticationError, KeyConfirmationError, MalformedMessageError, QkdError

    kinds = {
        AuthenticationError: "authentication failure",
        KeyConfirmationError: "key confirmation failure",
        MalformedMessageError: "malformed message",
        QkdError: "qkd failure",
    }
    for cls, text in kinds.items():
        if isinstance(exc, cls):
            return f"{text}: {exc}"
    return f"{type(exc).__name__}: {exc}"


# -- serve / connect ------------------------------------------------------------


def _handle_session(cfg, conn: socket.socket, peer: str) -> bool:
    from .handshake.transport import recv_record, run_responder, send_record

    with conn:
        try:
            result, records = run_responder(cfg, conn)
            msg = records.open(recv_record(conn))
            send_record(conn, records.seal(msg))
        except (HybridKexError, OSError) as exc:
            log.error("session from %s aborted: %s", peer, _describe(exc))
            print(f"session aborted peer={peer} reason={_describe(exc)}", flush=True)
            return False
    print(f"session ok peer={peer} suite={cfg.suite.label} fingerprint={result.keys.fingerprint()} "
          f"transcript={result.transcript_hash.hex()} echoed={len(msg)}B", flush=True)
    return True


def cmd_serve(args) -> int:
    from .qkd.server import parse_addr

    cfg = load_handshake_config(args.config, "responder", args.address, args.suite)
    host, port = parse_addr(cfg.address)
    srv = socket.create_server((host, port), reuse_port=False)
    bound = srv.getsockname()
    print(f"listening on {bound[0]}:{bound[1]} suite={cfg.suite.label}", flush=True)

    results: list[bool] = []
    threads = []
    lock = threading.Lock()

    def worker(conn, peer):
        ok = _handle_session(cfg, conn, peer)
        with lock:
            results.append(ok)

    try:
        count = 0
        while args.max_sessions is None or count < args.max_sessions:
            conn, addr = srv.accept()
            count += 1
            t = threading.Thread(target=worker, args=(conn, f"{addr[0]}:{addr[1]}"), daemon=True)
            t.start()
            threads.append(t)
    except KeyboardInterrupt:
        pass
    finally:
        srv.close()
        for t in threads:
            t.join()
    return EXIT_OK if all(results) else EXIT_RUNTIME


def cmd_connect(args) -> int:
    from .handshake.transport import recv_record, run_initiator, send_record
    from .qkd.server import parse_addr

    cfg = load_handshake_config(args.config, "initiator", args.address, args.suite)
    msg = args.message.encode()
    try:
        with socket.create_connection(parse_addr(cfg.address), timeout=60) as sock:
            result, records = run_initiator(cfg, sock)
            send_record(sock, records.seal(msg))
            echoed = records.open(recv_record(sock))
    except (HybridKexError, OSError) as exc:
        print(f"error: handshake aborted: {_describe(exc)}", file=sys.stderr)
        return EXIT_RUNTIME
    if echoed != msg:
        print("error: echo mismatch", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"handshake ok suite={cfg.suite.label} fingerprint={result.keys.fingerprint()} "
          f"transcript={result.transcript_hash.hex()}")
    print(f"echo ok: {echoed.decode(errors='replace')}")
    return EXIT_OK


# -- qkd-sim ----------------------------------------------------------------------


def cmd_qkd_sim(args) -> int:
    from .qkd.pool import KmeConfig
    from .qkd.server import make_server

    try:
        cfg = KmeConfig.load(args.config)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"bad KME config {args.config}: {exc}") from None
    srv = make_server(cfg, args.listen)
    signal.signal(signal.SIGTERM, lambda *_: threading.Thread(target=srv.shutdown, daemon=True).start())
    print(f"kme listening on {srv.url} epoch={cfg.epoch} keys={cfg.key_count}x{cfg.key_size_bits}b "
          f"master={cfg.master_sae_id} slave={cfg.slave_sae_id}", flush=True)
    try:
        srv.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        srv.server_close()
    return EXIT_OK


# -- bench / report ---------------------------------------------------------------


def cmd_bench(args) -> int:
    from .bench import BenchConfig, check_accounting, render_report, run_bench

    try:
        cfg = BenchConfig(iterations=args.iters, mtu=args.mtu, suites=tuple(args.suite),
                          warmup=args.warmup, output=args.format)
        suites = cfg.selected()
    except (ValueError, LookupError) as exc:
        raise UsageError(str(exc)) from None

    if args.check:
        results = check_accounting(suites, cfg.mtu)
        lines = [f"{'PASS' if r.ok else 'FAIL'} {r.label} {r.column}: expected {r.expected}, got {r.actual}"
                 for r in results]
        for s in suites:
            if s.unverified:
                lines.append(f"SKIP {s.label} bytes/packets: copied from the table (verified_accounting=false)")
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK if all(r.ok for r in results) else EXIT_CHECK_FAILED

    rows = run_bench(cfg)
    _emit(render_report(rows, cfg.output), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    from .bench import BenchRow, render_report

    try:
        rows = [BenchRow.from_json(o) for o in json.loads(Path(args.input).read_text())]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read report {args.input}: {exc}") from None
    _emit(render_report(rows, args.format), args.out)
    return EXIT_OK


COMMANDS = {
    "suites": cmd_suites,
    "keygen": cmd_keygen,
    "serve": cmd_serve,
    "connect": cmd_connect,
    "qkd-sim": cmd_qkd_sim,
    "bench": cmd_bench,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        _setup_logging(args.log_level)
        return COMMANDS[args.command](args)
    except (UsageError, UnknownSuiteError) as exc:
        print(f"hybridkex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HybridKexError as exc:
        print(f"hybridkex: error: {_describe(exc)}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"hybridkex: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
