from __future__ import annotations

import json
import os
import re
import stat
import subprocess
import time

import pytest
from helpers import (
    CLI,
    TamperingProxy,
    cli_env,
    parse_kv,
    spawn_kme,
    spawn_server,
    stop,
    write_node_configs,
)

from hybridkex import bench, cli
from hybridkex.handshake import read_key_file
from hybridkex.handshake.keyfile import MAGIC

SUBCOMMANDS = ["suites", "keygen", "serve", "connect", "qkd-sim", "bench", "report"]


def run(*args, env=None, timeout=120):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, env=env or cli_env(), timeout=timeout)


def _subparsers():
    parser = cli.build_parser()
    sub = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    return parser, sub.choices


def test_every_subcommand_exists():
    _, subs = _subparsers()
    assert list(subs) == SUBCOMMANDS


@pytest.mark.parametrize("name", [None, *SUBCOMMANDS])
def test_help_lists_exactly_the_accepted_flags(name, capsys):
    parser, subs = _subparsers()
    p = parser if name is None else subs[name]
    accepted = {o for a in p._actions for o in a.option_strings}
    with pytest.raises(SystemExit) as ei:
        cli.build_parser().parse_args(["--help"] if name is None else [name, "--help"])
    assert ei.value.code == 0
    text = capsys.readouterr().out
    shown = set(re.findall(r"(?<![\w-])(--?[a-z][a-z-]*)", text))
    assert accepted <= shown
    assert shown <= accepted


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nope"],
        ["suites", "--bogus"],
        ["keygen"],
        ["bench", "--iters", "x"],
        ["bench", "--iters", "1"],
        ["bench", "--suite", "NoSuchSuite", "--check"],
        ["bench", "--format", "xml"],
        ["--log-level", "loud", "suites"],
        ["report", "--in", "/nonexistent.json"],
        ["serve", "--config", "/nonexistent.json"],
        ["qkd-sim", "--config", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_64(argv):
    assert cli.main(argv) == 64


def test_log_env_override(monkeypatch):
    monkeypatch.setenv("HYBRIDKEX_LOG", "chatty")
    assert cli.main(["suites"]) == 64
    monkeypatch.setenv("HYBRIDKEX_LOG", "debug")
    assert cli.main(["suites"]) == 0


def test_suites_json():
    r = run("suites", "--json")
    assert r.returncode == 0
    data = json.loads(r.stdout)
    assert len(data) == 10
    assert set(data[0]) == {"label", "id", "classical", "pq", "bytes_total", "packets", "strength_pqc", "strength_classical"}
    assert data[0]["label"] == "X25519-Kyber768-Draft00"
    assert data[9]["bytes_total"] == 200722


def test_keygen_files_and_hex(tmp_path):
    prefix = tmp_path / "node"
    r = run("keygen", "--out", str(prefix), "--hex")
    assert r.returncode == 0
    key, pub = tmp_path / "node.key", tmp_path / "node.pub"
    assert stat.S_IMODE(os.stat(key).st_mode) == 0o600
    pub_bytes = pub.read_bytes()
    assert pub_bytes.startswith(MAGIC)
    assert pub_bytes.hex() in r.stdout
    kp = read_key_file(key)
    assert read_key_file(pub) == kp.verifying
    assert kp.classical_signing.hex() not in r.stdout
    # the ML-DSA signing key opens with the public seed rho; bytes 32..64 are secret
    assert kp.pq_signing[32:64].hex() not in r.stdout


def test_bench_check_fast_and_passing():
    t0 = time.perf_counter()
    r = run("bench", "--check")
    elapsed = time.perf_counter() - t0  # includes interpreter start-up
    assert r.returncode == 0
    assert elapsed < 1.0
    assert "FAIL" not in r.stdout
    r = run("bench", "--check", "--suite", "X25519-MLKEM768-Draft00")
    assert r.returncode == 0 and "expected 2336, got 2336" in r.stdout


def test_bench_check_mismatch_exits_2(monkeypatch, capsys):
    monkeypatch.setitem(bench.REFERENCE_ACCOUNTING, "X25519-MLKE768M-Draft00", (2337, 2, 192, 128))
    assert cli.main(["bench", "--check"]) == 2
    assert "FAIL X25519-MLKE768M-Draft00 bytes" in capsys.readouterr().out


def test_bench_and_report_round_trip(tmp_path):
    out = tmp_path / "b.json"
    r = run("bench", "--iters", "2", "--warmup", "0", "--suite", "X25519-MLKE512M-Draft00",
            "--suite", "X448-MLKEM768-Draft00", "--format", "json", "--out", str(out))
    assert r.returncode == 0, r.stderr
    rows = json.loads(out.read_text())
    assert [x["function"] for x in rows] == ["X25519-MLKE512M-Draft00", "X448-MLKEM768-Draft00"]
    r = run("report", "--in", str(out), "--format", "csv")
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == ",".join(bench.CSV_HEADER)
    assert len(r.stdout.splitlines()) == 3


def test_serve_connect_with_key_files_and_flag_precedence(tmp_path, alice, bob):
    from hybridkex.handshake import write_key_file

    write_key_file(tmp_path / "a.key", alice)
    write_key_file(tmp_path / "b.key", bob)
    write_key_file(tmp_path / "a.pub", alice.verifying)
    write_key_file(tmp_path / "b.pub", bob.verifying)
    base = {"suite": "X25519-Kyber768-Draft00", "address": "127.0.0.1:1"}
    (tmp_path / "s.json").write_text(json.dumps({**base, "keypair_file": "b.key", "peer_verifying_file": "a.pub"}))
    (tmp_path / "c.json").write_text(json.dumps({**base, "keypair_file": "a.key", "peer_verifying_file": "b.pub"}))
    # flags override the config's address and suite
    srv, addr = spawn_server(tmp_path / "s.json", extra=["--address", "127.0.0.1:0", "--suite", "X25519-MLKE512M-Draft00"])
    try:
        r = run("connect", "--config", str(tmp_path / "c.json"), "--address", addr, "--suite", "X25519-MLKE512M-Draft00",
                "--message", "precedence")
        assert r.returncode == 0, r.stderr
        assert "echo ok: precedence" in r.stdout
        out, _ = srv.communicate(timeout=30)
        assert srv.returncode == 0
        ckv = parse_kv(r.stdout.splitlines()[0])
        skv = parse_kv(out.splitlines()[-1])
        assert ckv["suite"] == skv["suite"] == "X25519-MLKE512M-Draft00"
        assert ckv["fingerprint"] == skv["fingerprint"]
        assert ckv["transcript"] == skv["transcript"]
    finally:
        stop(srv)


def test_connect_through_tampering_proxy_exits_1(tmp_path, alice, bob):
    sp, cp = write_node_configs(tmp_path, "X25519-MLKE512M-Draft00", alice, bob)
    srv, addr = spawn_server(sp)
    proxy = TamperingProxy(addr, offset=300)  # inside the responder's signed ciphertext
    try:
        r = run("connect", "--config", str(cp), "--address", proxy.address)
        assert r.returncode == 1
        assert "authentication failure" in r.stderr
        srv.communicate(timeout=30)
        assert srv.returncode == 1
    finally:
        proxy.close()
        stop(srv)


def test_responder_rejects_unpinned_initiator(tmp_path, alice, bob, mallory):
    sp, _ = write_node_configs(tmp_path, "X25519-MLKE512M-Draft00", alice, bob)
    _, cp = write_node_configs(tmp_path, "X25519-MLKE512M-Draft00", mallory, bob, tag="-m")
    srv, addr = spawn_server(sp)
    try:
        r = run("connect", "--config", str(cp), "--address", addr)
        assert r.returncode == 1
        out, _ = srv.communicate(timeout=30)
        assert "session aborted" in out and "authentication failure" in out
        assert srv.returncode == 1
    finally:
        stop(srv)


def test_connect_refused_is_runtime_error(tmp_path, alice, bob):
    _, cp = write_node_configs(tmp_path, "X25519-MLKE512M-Draft00", alice, bob, address="127.0.0.1:9")
    r = run("connect", "--config", str(cp))
    assert r.returncode == 1


def test_bad_handshake_configs(tmp_path, alice, bob):
    _, cp = write_node_configs(tmp_path, "X25519-MLKE512M-Draft00", alice, bob)
    raw = json.loads(cp.read_text())
    for mutate in (
        lambda c: c.pop("keypair"),
        lambda c: c.pop("peer_verifying"),
        lambda c: c.update(extra_key=1),
        lambda c: c.update(role="responder"),
        lambda c: c["keypair"].update(pq_signing="zz"),
        lambda c: c.update(suite="NoSuchSuite"),
    ):
        conf = json.loads(json.dumps(raw))
        mutate(conf)
        cp.write_text(json.dumps(conf))
        assert cli.main(["connect", "--config", str(cp)]) == 64


def test_qkd_sim_process_serves_status(tmp_path):
    from hybridkex.qkd import client_get_status

    proc, url = spawn_kme(tmp_path, key_count=8, key_size_bits=128)
    try:
        st = client_get_status(url, "sae-slave")
        assert (st.stored_key_count, st.key_size) == (8, 128)
    finally:
        stop(proc)
    assert proc.returncode == 0
