"""TCP framing and the socket drivers for both handshake roles."""

from __future__ import annotations

import logging
import socket
import struct

from ..errors import HandshakeError, MalformedMessageError
from ..primitives import RandomSource
from .protocol import (
    HandshakeConfig,
    HandshakeResult,
    initiator_finish,
    initiator_start,
    responder_finish,
    responder_respond,
)
from .record import RecordLayer
from .wire import HEADER_BYTES, decode_header

log = logging.getLogger(__name__)

_RECORD_LEN = struct.Struct(">I")
MAX_RECORD_BYTES = 1 << 24


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise HandshakeError(f"connection closed after {len(buf)} of {n} bytes")
        buf += chunk
    return bytes(buf)


def send_flight(sock: socket.socket, data: bytes) -> None:
    sock.sendall(data)


def recv_flight(sock: socket.socket) -> bytes:
    """One flight: the header announces the body length."""
    header = _recv_exact(sock, HEADER_BYTES)
    _, _, body_len = decode_header(header)
    return header + _recv_exact(sock, body_len)


def send_record(sock: socket.socket, record: bytes) -> None:
    sock.sendall(_RECORD_LEN.pack(len(record)) + record)


def recv_record(sock: socket.socket) -> bytes:
    (n,) = _RECORD_LEN.unpack(_recv_exact(sock, _RECORD_LEN.size))
    if n > MAX_RECORD_BYTES:
        raise MalformedMessageError(f"record length {n} exceeds limit")
    return _recv_exact(sock, n)


def run_initiator(
    cfg: HandshakeConfig, sock: socket.socket, rng: RandomSource | None = None
) -> tuple[HandshakeResult, RecordLayer]:
    state, f1 = initiator_start(cfg, rng)
    send_flight(sock, f1.to_bytes())
    keys, f3 = initiator_finish(state, recv_flight(sock))
    send_flight(sock, f3.to_bytes())
    result = HandshakeResult(keys, state.transcript.digest())
    return result, RecordLayer(keys, cfg.role)


def run_responder(
    cfg: HandshakeConfig, sock: socket.socket, rng: RandomSource | None = None
) -> tuple[HandshakeResult, RecordLayer]:
    state, f2 = responder_respond(cfg, recv_flight(sock), rng)
    send_flight(sock, f2.to_bytes())
    keys = responder_finish(state, recv_flight(sock))
    result = HandshakeResult(keys, state.transcript.digest())
    return result, RecordLayer(keys, cfg.role)
