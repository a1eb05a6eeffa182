"""Wire encoding for the three handshake flights.

Every flight is a fixed 8-byte header ``u8 flight_type | u8 version |
u16 suite_id | u32 body_len`` followed by ``u32``-length-prefixed fields in
a fixed order.  All integers are big-endian.  Decoding is strict: lengths
must match the suite profile exactly and the body must be consumed in full,
so every accepted message has exactly one encoding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..dual_sig import DUAL_SIGNATURE_BYTES
from ..errors import MalformedMessageError, UnknownSuiteError
from ..suites import HybridSuite, get_suite

VERSION = 1
HEADER = struct.Struct(">BBHI")
HEADER_BYTES = HEADER.size
FIELD_LEN = struct.Struct(">I")

FLIGHT1, FLIGHT2, FLIGHT3 = 1, 2, 3
RANDOM_BYTES = 32
MAC_BYTES = 32
QKD_KEY_ID_BYTES = 16
# hard cap for a single flight body; the McEliece public key is the largest field
MAX_BODY_BYTES = 1 << 20


def encode_message(flight_type: int, suite_id: int, fields: list[bytes]) -> bytes:
    body = b"".join(FIELD_LEN.pack(len(f)) + f for f in fields)
    return HEADER.pack(flight_type, VERSION, suite_id, len(body)) + body


def field_offset(fields: list[bytes], index: int) -> int:
    """Byte offset at which field ``index`` (its length prefix) starts."""
    return HEADER_BYTES + sum(FIELD_LEN.size + len(f) for f in fields[:index])


def decode_header(data: bytes) -> tuple[int, int, int]:
    if len(data) < HEADER_BYTES:
        raise MalformedMessageError(f"message shorter than the {HEADER_BYTES}-byte header")
    flight_type, version, suite_id, body_len = HEADER.unpack_from(data)
    if version != VERSION:
        raise MalformedMessageError(f"unsupported version {version}")
    if body_len > MAX_BODY_BYTES:
        raise MalformedMessageError(f"body length {body_len} exceeds limit")
    return flight_type, suite_id, body_len


def decode_message(data: bytes, expected_type: int, n_fields: int) -> tuple[HybridSuite, list[bytes]]:
    flight_type, suite_id, body_len = decode_header(data)
    if flight_type != expected_type:
        raise MalformedMessageError(f"expected flight {expected_type}, got {flight_type}")
    if len(data) != HEADER_BYTES + body_len:
        raise MalformedMessageError("body length does not match header")
    try:
        suite = get_suite(suite_id)
    except UnknownSuiteError as exc:
        raise MalformedMessageError(str(exc)) from None
    fields = []
    pos = HEADER_BYTES
    for _ in range(n_fields):
        if pos + FIELD_LEN.size > len(data):
            raise MalformedMessageError("truncated field length")
        (n,) = FIELD_LEN.unpack_from(data, pos)
        pos += FIELD_LEN.size
        if pos + n > len(data):
            raise MalformedMessageError("truncated field")
        fields.append(data[pos:pos + n])
        pos += n
    if pos != len(data):
        raise MalformedMessageError("trailing bytes after last field")
    return suite, fields


def _expect_len(name: str, value: bytes, n: int) -> None:
    if len(value) != n:
        raise MalformedMessageError(f"{name} must be {n} bytes, got {len(value)}")


@dataclass(frozen=True)
class Flight1:
    suite_id: int
    client_random: bytes
    classical_pub: bytes
    pq_pub: bytes
    extra: bytes
    qkd_key_id: bytes | None
    signature: bytes

    SIG_INDEX = 6

    def fields(self) -> list[bytes]:
        flag = b"\x01" if self.qkd_key_id is not None else b"\x00"
        return [
            self.client_random,
            self.classical_pub,
            self.pq_pub,
            self.extra,
            flag,
            self.qkd_key_id or b"",
            self.signature,
        ]

    def to_bytes(self) -> bytes:
        return encode_message(FLIGHT1, self.suite_id, self.fields())

    def signed_prefix_len(self) -> int:
        return field_offset(self.fields(), self.SIG_INDEX)

    @classmethod
    def from_bytes(cls, data: bytes) -> Flight1:
        suite, f = decode_message(data, FLIGHT1, 7)
        rnd, cpub, ppub, extra, flag, kid, sig = f
        _expect_len("client_random", rnd, RANDOM_BYTES)
        _expect_len("classical_pub", cpub, suite.classical.public_key_bytes)
        _expect_len("pq_pub", ppub, suite.pq.public_key_bytes)
        _expect_len("extra", extra, suite.extra_flight1_bytes)
        if flag not in (b"\x00", b"\x01"):
            raise MalformedMessageError("qkd flag must be a single 0/1 byte")
        _expect_len("qkd_key_id", kid, QKD_KEY_ID_BYTES if flag == b"\x01" else 0)
        _expect_len("signature", sig, DUAL_SIGNATURE_BYTES)
        return cls(suite.id, rnd, cpub, ppub, extra, kid if flag == b"\x01" else None, sig)


@dataclass(frozen=True)
class Flight2:
    suite_id: int
    server_random: bytes
    classical_pub: bytes
    pq_ct: bytes
    signature: bytes
    confirm_mac: bytes

    SIG_INDEX = 3
    MAC_INDEX = 4

    def fields(self) -> list[bytes]:
        return [self.server_random, self.classical_pub, self.pq_ct, self.signature, self.confirm_mac]

    def to_bytes(self) -> bytes:
        return encode_message(FLIGHT2, self.suite_id, self.fields())

    def signed_prefix_len(self) -> int:
        return field_offset(self.fields(), self.SIG_INDEX)

    def mac_prefix_len(self) -> int:
        return field_offset(self.fields(), self.MAC_INDEX)

    @classmethod
    def from_bytes(cls, data: bytes) -> Flight2:
        suite, f = decode_message(data, FLIGHT2, 5)
        rnd, cpub, ct, sig, mac = f
        _expect_len("server_random", rnd, RANDOM_BYTES)
        _expect_len("classical_pub", cpub, suite.classical.public_key_bytes)
        _expect_len("pq_ct", ct, suite.pq.ciphertext_bytes)
        _expect_len("signature", sig, DUAL_SIGNATURE_BYTES)
        _expect_len("confirm_mac", mac, MAC_BYTES)
        return cls(suite.id, rnd, cpub, ct, sig, mac)


@dataclass(frozen=True)
class Flight3:
    suite_id: int
    confirm_mac: bytes

    def to_bytes(self) -> bytes:
        return encode_message(FLIGHT3, self.suite_id, [self.confirm_mac])

    @classmethod
    def from_bytes(cls, data: bytes) -> Flight3:
        suite, (mac,) = decode_message(data, FLIGHT3, 1)
        _expect_len("confirm_mac", mac, MAC_BYTES)
        return cls(suite.id, mac)
