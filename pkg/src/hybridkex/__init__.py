"""Hybrid classical + post-quantum + QKD key establishment."""

from __future__ import annotations

from .dual_sig import DualKeypair, DualSignature, Verdict, VerifyingKeys, dual_keygen, dual_sign, dual_verify
from .errors import HybridKexError
from .hybrid_kex import (
    SecretBundle,
    SessionKeys,
    combine_secrets,
    derive_session_keys,
    hybrid_decapsulate,
    hybrid_encapsulate,
    hybrid_keygen,
    kdf2_sha256,
)
from .suites import HybridSuite, get_suite, list_suites, size_profile, strength_estimate

__version__ = "0.1.0"

__all__ = [
    "DualKeypair",
    "DualSignature",
    "HybridKexError",
    "HybridSuite",
    "SecretBundle",
    "SessionKeys",
    "Verdict",
    "VerifyingKeys",
    "combine_secrets",
    "derive_session_keys",
    "dual_keygen",
    "dual_sign",
    "dual_verify",
    "get_suite",
    "hybrid_decapsulate",
    "hybrid_encapsulate",
    "hybrid_keygen",
    "kdf2_sha256",
    "list_suites",
    "size_profile",
    "strength_estimate",
]
