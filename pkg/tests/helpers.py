"""Shared builders for handshake tests."""

from __future__ import annotations

import random
from dataclasses import replace

from hybridkex.handshake import (
    INITIATOR,
    RESPONDER,
    EtsiQkdLink,
    HandshakeConfig,
    initiator_finish,
    initiator_start,
    responder_finish,
    responder_respond,
)
from hybridkex.qkd import KmeClient

MASTER_SAE = "sae-master"
SLAVE_SAE = "sae-slave"


def qkd_links(initiator_url: str, responder_url: str | None = None):
    return (
        EtsiQkdLink(KmeClient(initiator_url), MASTER_SAE, SLAVE_SAE),
        EtsiQkdLink(KmeClient(responder_url or initiator_url), SLAVE_SAE, MASTER_SAE),
    )


def config_pair(suite, alice, bob, kme_url=None, responder_kme_url=None):
    iq = rq = None
    if kme_url:
        iq, rq = qkd_links(kme_url, responder_kme_url)
    icfg = HandshakeConfig(suite, INITIATOR, alice, bob.verifying, iq)
    rcfg = HandshakeConfig(suite, RESPONDER, bob, alice.verifying, rq)
    return icfg, rcfg


def run_in_process(icfg, rcfg, seed=None):
    rng = random.Random(seed) if seed is not None else None
    ist, f1 = initiator_start(icfg, rng)
    rst, f2 = responder_respond(rcfg, f1.to_bytes(), rng)
    ikeys, f3 = initiator_finish(ist, f2.to_bytes())
    rkeys = responder_finish(rst, f3.to_bytes())
    return ikeys, rkeys, ist, rst, (f1.to_bytes(), f2.to_bytes(), f3.to_bytes())


def fork(state):
    """Independent copy of a handshake state so a failed attempt does not poison it."""
    return replace(state, transcript=state.transcript.copy())


def flip(data: bytes, pos: int, mask: int = 0x01) -> bytes:
    b = bytearray(data)
    b[pos] ^= mask
    return bytes(b)


# -- subprocess helpers ----------------------------------------------------------

import json  # noqa: E402
import os  # noqa: E402
import subprocess  # noqa: E402
import sys  # noqa: E402

CLI = [sys.executable, "-m", "hybridkex.cli"]


def cli_env() -> dict:
    env = dict(os.environ)
    env.setdefault("HYBRIDKEX_LOG", "warn")
    return env


def spawn(args, **kw) -> subprocess.Popen:
    return subprocess.Popen(
        CLI + list(args), stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, env=cli_env(), **kw
    )


def wait_for_line(proc: subprocess.Popen, prefix: str) -> str:
    line = proc.stdout.readline()
    if not line.startswith(prefix):
        proc.kill()
        raise RuntimeError(f"expected {prefix!r}, got {line!r}; stderr: {proc.stderr.read()}")
    return line.strip()


def spawn_kme(tmp_path, name="kme", link_seed_hex=None, **cfg):
    """Start ``hybridkex qkd-sim`` on an ephemeral port; returns (proc, url)."""
    conf = {"link_seed_hex": link_seed_hex or bytes(range(32)).hex(), "listen_addr": "127.0.0.1:0"}
    conf.update(cfg)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(conf))
    proc = spawn(["qkd-sim", "--config", str(path)])
    line = wait_for_line(proc, "kme listening on ")
    return proc, line.split()[3]


def stop(proc: subprocess.Popen) -> None:
    if proc.poll() is None:
        proc.terminate()
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


def keypair_json(kp) -> dict:
    return {
        "classical_signing": kp.classical_signing.hex(),
        "classical_verifying": kp.classical_verifying.hex(),
        "pq_signing": kp.pq_signing.hex(),
        "pq_verifying": kp.pq_verifying.hex(),
    }


def verifying_json(kp) -> dict:
    return {"classical": kp.classical_verifying.hex(), "pq": kp.pq_verifying.hex()}


def write_node_configs(tmp_path, suite_label, alice, bob, address="127.0.0.1:0", kme_url=None, tag=""):
    """Responder (bob) and initiator (alice) config files with hex-encoded keys."""
    def qkd(own, peer):
        if not kme_url:
            return None
        return {"kme_endpoint": kme_url, "sae_id": own, "peer_sae_id": peer}

    srv = {"suite": suite_label, "role": "responder", "address": address,
           "keypair": keypair_json(bob), "peer_verifying": verifying_json(alice), "qkd": qkd(SLAVE_SAE, MASTER_SAE)}
    cli = {"suite": suite_label, "role": "initiator", "address": address,
           "keypair": keypair_json(alice), "peer_verifying": verifying_json(bob), "qkd": qkd(MASTER_SAE, SLAVE_SAE)}
    sp, cp = tmp_path / f"serve{tag}.json", tmp_path / f"connect{tag}.json"
    sp.write_text(json.dumps(srv))
    cp.write_text(json.dumps(cli))
    return sp, cp


def spawn_server(config_path, max_sessions=1, extra=()):
    """Start ``hybridkex serve``; returns (proc, "host:port")."""
    proc = spawn(["serve", "--config", str(config_path), "--max-sessions", str(max_sessions), *extra])
    line = wait_for_line(proc, "listening on ")
    return proc, line.split()[2]


def parse_kv(line: str) -> dict:
    return dict(tok.split("=", 1) for tok in line.split() if "=" in tok)


import socket  # noqa: E402
import threading  # noqa: E402


class TamperingProxy:
    """TCP relay that flips one byte at ``offset`` of the server-to-client stream."""

    def __init__(self, target: str, offset: int, mask: int = 0x01):
        host, port = target.rsplit(":", 1)
        self.target = (host, int(port))
        self.offset = offset
        self.mask = mask
        self.listener = socket.create_server(("127.0.0.1", 0))
        self.address = "127.0.0.1:%d" % self.listener.getsockname()[1]
        self.thread = threading.Thread(target=self._serve, daemon=True)
        self.thread.start()

    def _pipe(self, src, dst, tamper):
        seen = 0
        try:
            while True:
                data = src.recv(65536)
                if not data:
                    break
                if tamper and seen <= self.offset < seen + len(data):
                    b = bytearray(data)
                    b[self.offset - seen] ^= self.mask
                    data = bytes(b)
                seen += len(data)
                dst.sendall(data)
        except OSError:
            pass
        finally:
            for s in (src, dst):
                try:
                    s.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass

    def _serve(self):
        client, _ = self.listener.accept()
        upstream = socket.create_connection(self.target)
        t = threading.Thread(target=self._pipe, args=(client, upstream, False), daemon=True)
        t.start()
        self._pipe(upstream, client, True)
        t.join(timeout=5)
        client.close()
        upstream.close()

    def close(self):
        self.listener.close()
