"""Ed25519 + ML-DSA-65 dual signatures.

A dual signature is the two component signatures over the same message,
encoded back to back (64 + 3309 bytes).  Verification accepts only when
both components verify; both checks always run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import SignatureFormatError
from .primitives import (
    ED25519_KEY_BYTES,
    ED25519_SIG_BYTES,
    MLDSA65_SIG_BYTES,
    MLDSA65_SIGNING_KEY_BYTES,
    MLDSA65_VERIFYING_KEY_BYTES,
    Ed25519,
    MlDsa65,
    RandomSource,
    resolve_rng,
)

DUAL_SIGNATURE_BYTES = ED25519_SIG_BYTES + MLDSA65_SIG_BYTES


class Verdict(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    MALFORMED = "malformed"

    def __bool__(self) -> bool:
        return self is Verdict.ACCEPT


@dataclass(frozen=True)
class VerifyingKeys:
    classical: bytes
    pq: bytes

    def __post_init__(self) -> None:
        if len(self.classical) != ED25519_KEY_BYTES:
            raise ValueError(f"Ed25519 verifying key must be {ED25519_KEY_BYTES} bytes")
        if len(self.pq) != MLDSA65_VERIFYING_KEY_BYTES:
            raise ValueError(f"ML-DSA-65 verifying key must be {MLDSA65_VERIFYING_KEY_BYTES} bytes")


@dataclass(frozen=True)
class DualKeypair:
    classical_signing: bytes = field(repr=False)
    classical_verifying: bytes
    pq_signing: bytes = field(repr=False)
    pq_verifying: bytes

    def __post_init__(self) -> None:
        expected = {
            "classical_signing": ED25519_KEY_BYTES,
            "classical_verifying": ED25519_KEY_BYTES,
            "pq_signing": MLDSA65_SIGNING_KEY_BYTES,
            "pq_verifying": MLDSA65_VERIFYING_KEY_BYTES,
        }
        for name, size in expected.items():
            if len(getattr(self, name)) != size:
                raise ValueError(f"{name} must be {size} bytes, got {len(getattr(self, name))}")

    @property
    def verifying(self) -> VerifyingKeys:
        return VerifyingKeys(self.classical_verifying, self.pq_verifying)


@dataclass(frozen=True)
class DualSignature:
    classical_sig: bytes
    pq_sig: bytes

    def to_bytes(self) -> bytes:
        return self.classical_sig + self.pq_sig

    @classmethod
    def from_bytes(cls, data: bytes) -> DualSignature:
        if len(data) != DUAL_SIGNATURE_BYTES:
            raise SignatureFormatError(
                f"dual signature must be {DUAL_SIGNATURE_BYTES} bytes, got {len(data)}"
            )
        return cls(data[:ED25519_SIG_BYTES], data[ED25519_SIG_BYTES:])


def dual_keygen(rng: RandomSource | None = None) -> DualKeypair:
    rng = resolve_rng(rng)
    c_sk, c_pk = Ed25519.keygen(rng)
    q_sk, q_pk = MlDsa65.keygen(rng)
    return DualKeypair(c_sk, c_pk, q_sk, q_pk)


def dual_sign(kp: DualKeypair, msg: bytes) -> DualSignature:
    return DualSignature(
        Ed25519.sign(kp.classical_signing, msg),
        MlDsa65.sign(kp.pq_signing, msg),
    )


def dual_verify(pub: VerifyingKeys, msg: bytes, sig: DualSignature | bytes) -> Verdict:
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig = DualSignature.from_bytes(bytes(sig))
        except SignatureFormatError:
            return Verdict.MALFORMED
    if len(sig.classical_sig) != ED25519_SIG_BYTES or len(sig.pq_sig) != MLDSA65_SIG_BYTES:
        return Verdict.MALFORMED
    classical_ok = Ed25519.verify(pub.classical, msg, sig.classical_sig)
    pq_ok = MlDsa65.verify(pub.pq, msg, sig.pq_sig)
    return Verdict.ACCEPT if (classical_ok & pq_ok) else Verdict.REJECT
