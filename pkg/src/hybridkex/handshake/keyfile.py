"""Binary key files: ``b"HKX1" | u16 type | (u32 len | component)*``."""

from __future__ import annotations

import os
import struct
from pathlib import Path

from ..dual_sig import DualKeypair, VerifyingKeys
from ..errors import DecodeError

MAGIC = b"HKX1"
TYPE_DUAL_KEYPAIR = 1
TYPE_VERIFYING_KEYS = 2

_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")


def _pack(type_tag: int, parts: list[bytes]) -> bytes:
    return MAGIC + _U16.pack(type_tag) + b"".join(_U32.pack(len(p)) + p for p in parts)


def _unpack(data: bytes) -> tuple[int, list[bytes]]:
    if data[:4] != MAGIC:
        raise DecodeError("not an HKX1 key file")
    if len(data) < 6:
        raise DecodeError("truncated key file header")
    (type_tag,) = _U16.unpack_from(data, 4)
    parts, pos = [], 6
    while pos < len(data):
        if pos + 4 > len(data):
            raise DecodeError("truncated component length")
        (n,) = _U32.unpack_from(data, pos)
        pos += 4
        if pos + n > len(data):
            raise DecodeError("truncated component")
        parts.append(data[pos:pos + n])
        pos += n
    return type_tag, parts


def encode_keypair(kp: DualKeypair) -> bytes:
    return _pack(
        TYPE_DUAL_KEYPAIR,
        [kp.classical_signing, kp.classical_verifying, kp.pq_signing, kp.pq_verifying],
    )


def encode_verifying(vk: VerifyingKeys) -> bytes:
    return _pack(TYPE_VERIFYING_KEYS, [vk.classical, vk.pq])


def decode_key_file(data: bytes) -> DualKeypair | VerifyingKeys:
    type_tag, parts = _unpack(data)
    try:
        if type_tag == TYPE_DUAL_KEYPAIR and len(parts) == 4:
            return DualKeypair(*parts)
        if type_tag == TYPE_VERIFYING_KEYS and len(parts) == 2:
            return VerifyingKeys(*parts)
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
    raise DecodeError(f"unsupported key file type {type_tag} with {len(parts)} components")


def write_key_file(path: str | Path, obj: DualKeypair | VerifyingKeys) -> None:
    path = Path(path)
    if isinstance(obj, DualKeypair):
        data, mode = encode_keypair(obj), 0o600
    else:
        data, mode = encode_verifying(obj), 0o644
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, mode)
    with os.fdopen(fd, "wb") as fh:
        fh.write(data)
    try:
        os.chmod(path, mode)
    except OSError:
        pass


def read_key_file(path: str | Path) -> DualKeypair | VerifyingKeys:
    return decode_key_file(Path(path).read_bytes())
