"""AES-256-GCM record protection keyed by the session encryption key.

Nonce = 4-byte direction tag || 8-byte big-endian sequence number.  Each
side keeps one counter per direction; a record is only accepted at the next
expected sequence number, which rejects replays and reordering.
"""

from __future__ import annotations

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..errors import RecordAuthError, SessionExpiredError
from ..hybrid_kex import SessionKeys
from .protocol import INITIATOR, RESPONDER

_DIRECTION = {
    INITIATOR: b"I2R\x00",
    RESPONDER: b"R2I\x00",
}
_SEQ_LIMIT = 2**64


class RecordLayer:
    def __init__(self, keys: SessionKeys, role: str) -> None:
        if role not in _DIRECTION:
            raise ValueError(f"unknown role {role!r}")
        self._aead = AESGCM(keys.enc_key)
        self._send_tag = _DIRECTION[role]
        self._recv_tag = _DIRECTION[RESPONDER if role == INITIATOR else INITIATOR]
        self.send_seq = 0
        self.recv_seq = 0

    @staticmethod
    def _nonce(tag: bytes, seq: int) -> bytes:
        return tag + seq.to_bytes(8, "big")

    def seal(self, plaintext: bytes, aad: bytes = b"") -> bytes:
        if self.send_seq >= _SEQ_LIMIT:
            raise SessionExpiredError("send sequence space exhausted")
        record = self._aead.encrypt(self._nonce(self._send_tag, self.send_seq), plaintext, aad)
        self.send_seq += 1
        return record

    def open(self, record: bytes, aad: bytes = b"") -> bytes:
        if self.recv_seq >= _SEQ_LIMIT:
            raise SessionExpiredError("receive sequence space exhausted")
        try:
            plaintext = self._aead.decrypt(self._nonce(self._recv_tag, self.recv_seq), record, aad)
        except InvalidTag:
            raise RecordAuthError(f"record {self.recv_seq} failed authentication") from None
        self.recv_seq += 1
        return plaintext
