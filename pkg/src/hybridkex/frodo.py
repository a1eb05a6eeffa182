"""FrodoKEM-976 (SHAKE and AES matrix generation).

No maintained Python binding ships FrodoKEM, so this module implements the
976 parameter set directly on numpy.  All randomness is passed in
explicitly: ``keygen`` takes the 64 bytes ``s || seedSE || z`` and
``encaps`` takes the 24-byte ``mu``, which makes the scheme reproducible
under a seeded source and lets known-answer vectors pin it bit-for-bit.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

N = 976
NBAR = 8
LOGQ = 16
Q = 1 << LOGQ
EXTRACTED_BITS = 3
LEN_SEED_A = 16
LEN_SEC = 24  # s, seedSE, k, pkh, mu and ss all share this length
CDF_TABLE = np.array(
    [5638, 15915, 23689, 28571, 31116, 32217, 32613, 32731, 32760, 32766, 32767],
    dtype=np.int32,
)

PUBLIC_KEY_BYTES = LEN_SEED_A + LOGQ * N * NBAR // 8
CIPHERTEXT_BYTES = LOGQ * N * NBAR // 8 + LOGQ * NBAR * NBAR // 8
SECRET_KEY_BYTES = LEN_SEC + PUBLIC_KEY_BYTES + 2 * N * NBAR + LEN_SEC
SHARED_SECRET_BYTES = LEN_SEC
KEYGEN_RANDOM_BYTES = 2 * LEN_SEC + LEN_SEED_A
ENCAPS_RANDOM_BYTES = LEN_SEC

_C1_BYTES = LOGQ * N * NBAR // 8


def _shake(data: bytes, n: int) -> bytes:
    return hashlib.shake_256(data).digest(n)


def _gen_a_shake(seed_a: bytes) -> np.ndarray:
    rows = bytearray()
    for i in range(N):
        rows += hashlib.shake_128(i.to_bytes(2, "little") + seed_a).digest(2 * N)
    return np.frombuffer(bytes(rows), dtype="<u2").reshape(N, N)


def _gen_a_aes(seed_a: bytes) -> np.ndarray:
    # block (i, j) = LE16(i) || LE16(j) || 0^12 for every stripe of 8 columns
    blocks = np.zeros((N, N // 8, 8), dtype="<u2")
    blocks[:, :, 0] = np.arange(N, dtype=np.uint16)[:, None]
    blocks[:, :, 1] = np.arange(0, N, 8, dtype=np.uint16)[None, :]
    enc = Cipher(algorithms.AES(seed_a), modes.ECB()).encryptor()
    out = enc.update(blocks.tobytes()) + enc.finalize()
    return np.frombuffer(out, dtype="<u2").reshape(N, N)


def _sample(raw: np.ndarray) -> np.ndarray:
    """Map uniform 16-bit words to signed noise via the CDF table."""
    prnd = (raw >> 1).astype(np.int32)
    sign = (raw & 1).astype(np.int64)
    mag = (prnd[..., None] > CDF_TABLE[None, :-1]).sum(axis=-1).astype(np.int64)
    return np.where(sign == 1, -mag, mag)


def _mod_q(x: np.ndarray) -> np.ndarray:
    return np.mod(np.rint(x).astype(np.int64), Q)


def _matmul_mod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # One operand is noise with |e| <= 10 and the other < 2^16, so every
    # partial sum stays below 976 * 2^16 * 10 < 2^53 and float64 is exact.
    return _mod_q(a.astype(np.float64) @ b.astype(np.float64))


def _pack(m: np.ndarray) -> bytes:
    return np.mod(m, Q).astype(">u2").tobytes()


def _unpack(b: bytes, shape: tuple[int, int]) -> np.ndarray:
    return np.frombuffer(b, dtype=">u2").astype(np.int64).reshape(shape)


def _encode(mu: bytes) -> np.ndarray:
    out = np.empty(NBAR * NBAR, dtype=np.int64)
    for w in range(NBAR * NBAR // 8):
        temp = int.from_bytes(mu[w * EXTRACTED_BITS:(w + 1) * EXTRACTED_BITS], "little")
        for j in range(8):
            out[w * 8 + j] = (temp & 0b111) << (LOGQ - EXTRACTED_BITS)
            temp >>= EXTRACTED_BITS
    return out.reshape(NBAR, NBAR)


def _decode(m: np.ndarray) -> bytes:
    flat = np.mod(m, Q).reshape(-1)
    vals = ((flat + (1 << (LOGQ - EXTRACTED_BITS - 1))) >> (LOGQ - EXTRACTED_BITS)) & 0b111
    out = bytearray()
    for w in range(NBAR * NBAR // 8):
        temp = 0
        for j in range(8):
            temp |= int(vals[w * 8 + j]) << (EXTRACTED_BITS * j)
        out += temp.to_bytes(EXTRACTED_BITS, "little")
    return bytes(out)


@dataclass(frozen=True)
class FrodoKEM976:
    """One FrodoKEM-976 variant; ``matrix`` is ``"shake"`` or ``"aes"``."""

    matrix: str = "shake"

    public_key_bytes = PUBLIC_KEY_BYTES
    ciphertext_bytes = CIPHERTEXT_BYTES
    secret_key_bytes = SECRET_KEY_BYTES
    shared_secret_bytes = SHARED_SECRET_BYTES

    def __post_init__(self) -> None:
        if self.matrix not in ("shake", "aes"):
            raise ValueError(f"matrix must be 'shake' or 'aes', not {self.matrix!r}")

    @property
    def name(self) -> str:
        return f"FrodoKEM-976-{self.matrix.upper()}"

    def _gen_a(self, seed_a: bytes) -> np.ndarray:
        return _gen_a_shake(seed_a) if self.matrix == "shake" else _gen_a_aes(seed_a)

    def keygen(self, randomness: bytes) -> tuple[bytes, bytes]:
        if len(randomness) != KEYGEN_RANDOM_BYTES:
            raise ValueError(f"keygen needs {KEYGEN_RANDOM_BYTES} random bytes")
        s = randomness[:LEN_SEC]
        seed_se = randomness[LEN_SEC:2 * LEN_SEC]
        z = randomness[2 * LEN_SEC:]
        seed_a = _shake(z, LEN_SEED_A)

        r = np.frombuffer(_shake(b"\x5f" + seed_se, 4 * N * NBAR), dtype="<u2")
        s_t = _sample(r[:N * NBAR]).reshape(NBAR, N)
        e = _sample(r[N * NBAR:]).reshape(N, NBAR)

        a = self._gen_a(seed_a)
        b = np.mod(_matmul_mod(a, s_t.T) + e, Q)
        pk = seed_a + _pack(b)
        sk = s + pk + np.mod(s_t, Q).astype("<u2").tobytes() + _shake(pk, LEN_SEC)
        return pk, sk

    def _encrypt(self, pk: bytes, pkh: bytes, mu: bytes) -> tuple[bytes, bytes]:
        """Deterministic core shared by encaps and the re-encryption check."""
        g2 = _shake(pkh + mu, 2 * LEN_SEC)
        seed_se, k = g2[:LEN_SEC], g2[LEN_SEC:]
        r = np.frombuffer(_shake(b"\x96" + seed_se, (2 * N + NBAR) * NBAR * 2), dtype="<u2")
        sp = _sample(r[:N * NBAR]).reshape(NBAR, N)
        ep = _sample(r[N * NBAR:2 * N * NBAR]).reshape(NBAR, N)
        epp = _sample(r[2 * N * NBAR:]).reshape(NBAR, NBAR)

        a = self._gen_a(pk[:LEN_SEED_A])
        bp = np.mod(_matmul_mod(sp, a) + ep, Q)
        b = _unpack(pk[LEN_SEED_A:], (N, NBAR))
        v = np.mod(_matmul_mod(sp, b) + epp, Q)
        c = np.mod(v + _encode(mu), Q)
        return _pack(bp) + _pack(c), k

    def encaps(self, pk: bytes, mu: bytes) -> tuple[bytes, bytes]:
        if len(pk) != PUBLIC_KEY_BYTES:
            raise ValueError(f"public key must be {PUBLIC_KEY_BYTES} bytes, got {len(pk)}")
        if len(mu) != ENCAPS_RANDOM_BYTES:
            raise ValueError(f"encaps needs {ENCAPS_RANDOM_BYTES} random bytes")
        ct, k = self._encrypt(pk, _shake(pk, LEN_SEC), mu)
        return ct, _shake(ct + k, LEN_SEC)

    def decaps(self, sk: bytes, ct: bytes) -> bytes:
        if len(sk) != SECRET_KEY_BYTES:
            raise ValueError(f"secret key must be {SECRET_KEY_BYTES} bytes, got {len(sk)}")
        if len(ct) != CIPHERTEXT_BYTES:
            raise ValueError(f"ciphertext must be {CIPHERTEXT_BYTES} bytes, got {len(ct)}")
        s = sk[:LEN_SEC]
        pk = sk[LEN_SEC:LEN_SEC + PUBLIC_KEY_BYTES]
        off = LEN_SEC + PUBLIC_KEY_BYTES
        s_t = np.frombuffer(sk[off:off + 2 * N * NBAR], dtype="<i2").astype(np.int64).reshape(NBAR, N)
        pkh = sk[off + 2 * N * NBAR:]

        bp = _unpack(ct[:_C1_BYTES], (NBAR, N))
        c = _unpack(ct[_C1_BYTES:], (NBAR, NBAR))
        w = np.mod(c - _matmul_mod(bp, s_t.T), Q)
        mu = _decode(w)

        ct2, k = self._encrypt(pk, pkh, mu)
        # implicit rejection: a mismatching re-encryption keys F with s
        ok = hmac.compare_digest(ct, ct2)
        return _shake(ct + (k if ok else s), LEN_SEC)
