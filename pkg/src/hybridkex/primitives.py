"""Provider layer for the standard primitives.

Every algorithm the protocol composes (X25519, X448, ML-KEM, FrodoKEM,
Classic McEliece, Ed25519, ML-DSA-65) is reached through a small provider
object so that the hybrid combiner, handshake and benchmark never touch a
library API directly.

Randomness is passed explicitly as any object with ``randbytes(n)``
(``random.Random`` qualifies, as does :class:`SystemRandomSource`).  The
classical groups, FrodoKEM and ML-DSA draw all of their randomness from it.
The compiled ML-KEM and McEliece bindings only expose OS-seeded key
generation and encapsulation, so for those the source is not consulted.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from functools import cache
from typing import Protocol

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric import ed25519, x448, x25519

from .errors import EncapsulationError, KeygenError, PrimitiveError
from .frodo import ENCAPS_RANDOM_BYTES, KEYGEN_RANDOM_BYTES, FrodoKEM976
from .suites import ClassicalName, KemName, PQ_KEMS


class RandomSource(Protocol):
    def randbytes(self, n: int, /) -> bytes: ...


class SystemRandomSource:
    """CSPRNG-backed source; the default everywhere."""

    def randbytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


def resolve_rng(rng: RandomSource | None) -> RandomSource:
    return SystemRandomSource() if rng is None else rng


# -- classical ECDH -----------------------------------------------------------


@dataclass(frozen=True)
class EcdhGroup:
    name: str
    private_key_bytes: int
    public_key_bytes: int
    _impl: type

    def generate(self, rng: RandomSource) -> tuple[bytes, bytes]:
        """Return (private, public) raw encodings."""
        priv = rng.randbytes(self.private_key_bytes)
        try:
            pub = self._impl.from_private_bytes(priv).public_key().public_bytes_raw()
        except Exception as exc:  # noqa: BLE001 - provider errors are opaque
            raise KeygenError(self.name, str(exc)) from exc
        return priv, pub

    def public_from_private(self, priv: bytes) -> bytes:
        return self._impl.from_private_bytes(priv).public_key().public_bytes_raw()

    def exchange(self, priv: bytes, peer_pub: bytes) -> bytes:
        if len(peer_pub) != self.public_key_bytes:
            raise EncapsulationError(
                self.name, f"peer public key must be {self.public_key_bytes} bytes, got {len(peer_pub)}"
            )
        pub_cls = x25519.X25519PublicKey if self.name == "X25519" else x448.X448PublicKey
        try:
            peer = pub_cls.from_public_bytes(peer_pub)
            return self._impl.from_private_bytes(priv).exchange(peer)
        except ValueError as exc:
            # all-zero output from a small-order point lands here
            raise EncapsulationError(self.name, str(exc)) from exc


_GROUPS = {
    ClassicalName.X25519: EcdhGroup("X25519", 32, 32, x25519.X25519PrivateKey),
    ClassicalName.X448: EcdhGroup("X448", 56, 56, x448.X448PrivateKey),
}


def ecdh_group(name: ClassicalName | str) -> EcdhGroup:
    return _GROUPS[ClassicalName(name)]


# -- post-quantum KEMs --------------------------------------------------------


class Kem(Protocol):
    name: str
    public_key_bytes: int
    ciphertext_bytes: int
    shared_secret_bytes: int

    def keygen(self, rng: RandomSource) -> tuple[bytes, bytes]: ...

    def encaps(self, pk: bytes, rng: RandomSource) -> tuple[bytes, bytes]: ...

    def decaps(self, sk: bytes, ct: bytes) -> bytes: ...


class CompiledKem:
    """Adapter over a ``pqcrypto.kem`` submodule (OS-seeded)."""

    def __init__(self, name: str, module_name: str) -> None:
        import importlib

        self.name = name
        self._mod = importlib.import_module(f"pqcrypto.kem.{module_name}")
        self.public_key_bytes = self._mod.PUBLIC_KEY_SIZE
        self.ciphertext_bytes = self._mod.CIPHERTEXT_SIZE
        self.shared_secret_bytes = self._mod.SHARED_SECRET_SIZE
        self.secret_key_bytes = self._mod.SECRET_KEY_SIZE

    def keygen(self, rng: RandomSource) -> tuple[bytes, bytes]:
        try:
            return self._mod.keygen()
        except Exception as exc:  # noqa: BLE001
            raise KeygenError(self.name, str(exc)) from exc

    def encaps(self, pk: bytes, rng: RandomSource) -> tuple[bytes, bytes]:
        if len(pk) != self.public_key_bytes:
            raise EncapsulationError(
                self.name, f"public key must be {self.public_key_bytes} bytes, got {len(pk)}"
            )
        try:
            return self._mod.encaps(pk)
        except Exception as exc:  # noqa: BLE001
            raise EncapsulationError(self.name, str(exc)) from exc

    def decaps(self, sk: bytes, ct: bytes) -> bytes:
        if len(ct) != self.ciphertext_bytes:
            raise PrimitiveError(self.name, f"ciphertext must be {self.ciphertext_bytes} bytes")
        return self._mod.decaps(sk, ct)


class FrodoKem:
    """Seeded adapter over :class:`FrodoKEM976`."""

    def __init__(self, matrix: str) -> None:
        self._impl = FrodoKEM976(matrix)
        self.name = self._impl.name
        self.public_key_bytes = self._impl.public_key_bytes
        self.ciphertext_bytes = self._impl.ciphertext_bytes
        self.shared_secret_bytes = self._impl.shared_secret_bytes
        self.secret_key_bytes = self._impl.secret_key_bytes

    def keygen(self, rng: RandomSource) -> tuple[bytes, bytes]:
        return self._impl.keygen(rng.randbytes(KEYGEN_RANDOM_BYTES))

    def encaps(self, pk: bytes, rng: RandomSource) -> tuple[bytes, bytes]:
        try:
            return self._impl.encaps(pk, rng.randbytes(ENCAPS_RANDOM_BYTES))
        except ValueError as exc:
            raise EncapsulationError(self.name, str(exc)) from exc

    def decaps(self, sk: bytes, ct: bytes) -> bytes:
        try:
            return self._impl.decaps(sk, ct)
        except ValueError as exc:
            raise PrimitiveError(self.name, str(exc)) from exc


_KEM_FACTORIES = {
    "ML-KEM-512": lambda: CompiledKem("ML-KEM-512", "ml_kem_512"),
    "ML-KEM-768": lambda: CompiledKem("ML-KEM-768", "ml_kem_768"),
    "ML-KEM-1024": lambda: CompiledKem("ML-KEM-1024", "ml_kem_1024"),
    "FrodoKEM-976-SHAKE": lambda: FrodoKem("shake"),
    "FrodoKEM-976-AES": lambda: FrodoKem("aes"),
    "mceliece348864": lambda: CompiledKem("mceliece348864", "mceliece_348864"),
}


@cache
def kem_provider(name: KemName | str) -> Kem:
    """Provider for a registry KEM; instances are shared and stateless."""
    param_set = PQ_KEMS[KemName(name)].parameter_set
    return _KEM_FACTORIES[param_set]()


# -- signatures ---------------------------------------------------------------

ED25519_KEY_BYTES = 32
ED25519_SIG_BYTES = 64
MLDSA65_SIGNING_KEY_BYTES = 4032
MLDSA65_VERIFYING_KEY_BYTES = 1952
MLDSA65_SIG_BYTES = 3309


class Ed25519:
    name = "Ed25519"

    @staticmethod
    def keygen(rng: RandomSource) -> tuple[bytes, bytes]:
        """Return (signing, verifying) raw keys."""
        seed = rng.randbytes(ED25519_KEY_BYTES)
        pub = ed25519.Ed25519PrivateKey.from_private_bytes(seed).public_key().public_bytes_raw()
        return seed, pub

    @staticmethod
    def sign(signing_key: bytes, msg: bytes) -> bytes:
        return ed25519.Ed25519PrivateKey.from_private_bytes(signing_key).sign(msg)

    @staticmethod
    def verify(verifying_key: bytes, msg: bytes, sig: bytes) -> bool:
        try:
            ed25519.Ed25519PublicKey.from_public_bytes(verifying_key).verify(sig, msg)
        except (InvalidSignature, ValueError):
            return False
        return True


class MlDsa65:
    """ML-DSA-65 via dilithium-py, keyed from a 32-byte seed."""

    name = "ML-DSA-65"

    @staticmethod
    def _impl():
        from dilithium_py.ml_dsa import ML_DSA_65

        return ML_DSA_65

    @classmethod
    def keygen(cls, rng: RandomSource) -> tuple[bytes, bytes]:
        try:
            pk, sk = cls._impl().key_derive(rng.randbytes(32))
        except Exception as exc:  # noqa: BLE001
            raise KeygenError(cls.name, str(exc)) from exc
        return sk, pk

    @classmethod
    def sign(cls, signing_key: bytes, msg: bytes) -> bytes:
        return cls._impl().sign(signing_key, msg)

    @classmethod
    def verify(cls, verifying_key: bytes, msg: bytes, sig: bytes) -> bool:
        if len(sig) != MLDSA65_SIG_BYTES or len(verifying_key) != MLDSA65_VERIFYING_KEY_BYTES:
            return False
        try:
            return bool(cls._impl().verify(verifying_key, msg, sig))
        except (ValueError, IndexError):
            return False
