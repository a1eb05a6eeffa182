"""Authenticated three-flight hybrid handshake and record layer."""

from .keyfile import decode_key_file, encode_keypair, encode_verifying, read_key_file, write_key_file
from .protocol import (
    INITIATOR,
    RESPONDER,
    EtsiQkdLink,
    HandshakeConfig,
    HandshakeResult,
    InitiatorState,
    QkdLink,
    ResponderState,
    Transcript,
    initiator_finish,
    initiator_start,
    responder_finish,
    responder_respond,
)
from .record import RecordLayer
from .transport import recv_flight, recv_record, run_initiator, run_responder, send_flight, send_record
from .wire import Flight1, Flight2, Flight3

__all__ = [
    "INITIATOR",
    "RESPONDER",
    "EtsiQkdLink",
    "Flight1",
    "Flight2",
    "Flight3",
    "HandshakeConfig",
    "HandshakeResult",
    "InitiatorState",
    "QkdLink",
    "RecordLayer",
    "ResponderState",
    "Transcript",
    "decode_key_file",
    "encode_keypair",
    "encode_verifying",
    "initiator_finish",
    "initiator_start",
    "read_key_file",
    "recv_flight",
    "recv_record",
    "responder_finish",
    "responder_respond",
    "run_initiator",
    "run_responder",
    "send_flight",
    "send_record",
    "write_key_file",
]
