"""Hybrid key establishment: ECDH + post-quantum KEM (+ optional QKD key).

The three shared secrets are concatenated in the fixed order
``ecdh_ss || kem_ss || qkd_key`` and expanded with KDF2 over SHA-256 into a
32-byte encryption key and a 32-byte MAC key.  The handshake transcript
hash is appended to the KDF input so the keys are bound to one session.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import DecodeError, EncapsulationError, HybridKexError
from .primitives import RandomSource, ecdh_group, kem_provider, resolve_rng
from .suites import HybridSuite, get_suite

__all__ = [
    "HybridPublicBundle",
    "HybridPrivateState",
    "HybridCiphertextBundle",
    "SecretBundle",
    "SessionKeys",
    "hybrid_keygen",
    "hybrid_encapsulate",
    "hybrid_decapsulate",
    "combine_secrets",
    "kdf2_sha256",
    "derive_session_keys",
]

SESSION_KEY_BYTES = 32
TRANSCRIPT_HASH_BYTES = 32
_KDF2_MAX_BLOCKS = 2**32


@dataclass(frozen=True)
class HybridPublicBundle:
    suite_id: int
    classical_pub: bytes
    pq_pub: bytes

    def check(self, suite: HybridSuite) -> None:
        if self.suite_id != suite.id:
            raise EncapsulationError("hybrid", f"bundle is for suite {self.suite_id}, expected {suite.id}")
        if len(self.classical_pub) != suite.classical.public_key_bytes:
            raise EncapsulationError(suite.classical.name.value, "classical public key has wrong length")
        if len(self.pq_pub) != suite.pq.public_key_bytes:
            raise EncapsulationError(suite.pq.parameter_set, "post-quantum public key has wrong length")


@dataclass(frozen=True)
class HybridPrivateState:
    suite_id: int
    classical_priv: bytes = field(repr=False)
    pq_sk: bytes = field(repr=False)


@dataclass(frozen=True)
class HybridCiphertextBundle:
    suite_id: int
    classical_pub: bytes
    pq_ct: bytes


@dataclass(frozen=True)
class SecretBundle:
    ecdh_ss: bytes = field(repr=False)
    kem_ss: bytes = field(repr=False)
    qkd_key: bytes = field(default=b"", repr=False)


@dataclass(frozen=True)
class SessionKeys:
    enc_key: bytes = field(repr=False)
    mac_key: bytes = field(repr=False)

    def fingerprint(self) -> str:
        """Public commitment to the keys, safe to log and compare across peers."""
        return hashlib.sha256(b"hybridkex session fingerprint" + self.enc_key + self.mac_key).hexdigest()


def hybrid_keygen(
    suite: HybridSuite | str | int, rng: RandomSource | None = None
) -> tuple[HybridPublicBundle, HybridPrivateState]:
    """Generate an ephemeral ECDH keypair and a KEM keypair for ``suite``."""
    suite = get_suite(suite)
    rng = resolve_rng(rng)
    c_priv, c_pub = ecdh_group(suite.classical.name).generate(rng)
    pq_pk, pq_sk = kem_provider(suite.pq.name).keygen(rng)
    return (
        HybridPublicBundle(suite.id, c_pub, pq_pk),
        HybridPrivateState(suite.id, c_priv, pq_sk),
    )


def hybrid_encapsulate(
    suite: HybridSuite | str | int,
    peer: HybridPublicBundle,
    rng: RandomSource | None = None,
) -> tuple[HybridCiphertextBundle, bytes, bytes]:
    """Respond to ``peer``: ephemeral ECDH plus KEM encapsulation.

    Returns the ciphertext bundle and the two shared secrets
    ``(ecdh_ss, kem_ss)``.
    """
    suite = get_suite(suite)
    peer.check(suite)
    rng = resolve_rng(rng)
    group = ecdh_group(suite.classical.name)
    e_priv, e_pub = group.generate(rng)
    ecdh_ss = group.exchange(e_priv, peer.classical_pub)
    pq_ct, kem_ss = kem_provider(suite.pq.name).encaps(peer.pq_pub, rng)
    return HybridCiphertextBundle(suite.id, e_pub, pq_ct), ecdh_ss, kem_ss


def hybrid_decapsulate(
    suite: HybridSuite | str | int,
    state: HybridPrivateState,
    ct: HybridCiphertextBundle,
) -> tuple[bytes, bytes]:
    suite = get_suite(suite)
    if ct.suite_id != suite.id or state.suite_id != suite.id:
        raise DecodeError(f"ciphertext/state suite mismatch for suite {suite.id}")
    if len(ct.classical_pub) != suite.classical.public_key_bytes:
        raise DecodeError(
            f"classical public key is {len(ct.classical_pub)} bytes, expected {suite.classical.public_key_bytes}"
        )
    if len(ct.pq_ct) != suite.pq.ciphertext_bytes:
        raise DecodeError(f"KEM ciphertext is {len(ct.pq_ct)} bytes, expected {suite.pq.ciphertext_bytes}")
    ecdh_ss = ecdh_group(suite.classical.name).exchange(state.classical_priv, ct.classical_pub)
    kem_ss = kem_provider(suite.pq.name).decaps(state.pq_sk, ct.pq_ct)
    return ecdh_ss, kem_ss


def combine_secrets(b: SecretBundle) -> bytes:
    """Concatenate ``ecdh_ss || kem_ss || qkd_key``; only the QKD part may be empty."""
    if not b.ecdh_ss:
        raise HybridKexError("ECDH shared secret is empty")
    if not b.kem_ss:
        raise HybridKexError("KEM shared secret is empty")
    return b.ecdh_ss + b.kem_ss + b.qkd_key


def kdf2_sha256(z: bytes, out_len: int) -> bytes:
    """ISO 18033-2 KDF2 with SHA-256: blocks SHA-256(z || I2OSP(i, 4)), i = 1, 2, ..."""
    if out_len < 0:
        raise ValueError("out_len must be non-negative")
    n_blocks = -(-out_len // hashlib.sha256().digest_size)
    if n_blocks > _KDF2_MAX_BLOCKS:
        raise ValueError("out_len exceeds 2^32 hash blocks")
    out = bytearray()
    for counter in range(1, n_blocks + 1):
        out += hashlib.sha256(z + counter.to_bytes(4, "big")).digest()
    return bytes(out[:out_len])


def derive_session_keys(ikm: bytes, transcript_hash: bytes) -> SessionKeys:
    if not ikm:
        raise HybridKexError("input keying material is empty")
    if len(transcript_hash) != TRANSCRIPT_HASH_BYTES:
        raise ValueError(f"transcript hash must be {TRANSCRIPT_HASH_BYTES} bytes")
    okm = kdf2_sha256(ikm + transcript_hash, 2 * SESSION_KEY_BYTES)
    return SessionKeys(okm[:SESSION_KEY_BYTES], okm[SESSION_KEY_BYTES:])
