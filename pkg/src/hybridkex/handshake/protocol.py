"""Three-flight authenticated hybrid key establishment.

::

    initiator                                   responder
    Flight1  random, ECDH pub, KEM pub, [qkd key_ID], sig_I  ->
             <-  Flight2  random, ECDH pub, KEM ct, sig_R, mac_R
    Flight3  mac_I  ->

A running SHA-256 absorbs every flight byte in order.  Each signature and
MAC covers the hash of everything that precedes it; the session keys are
derived from ``ecdh_ss || kem_ss || qkd_key`` and the transcript hash taken
just before the responder's signature.  QKD key bytes never cross the
channel: the initiator draws a key with ``enc_keys`` and sends only its
key_ID, the responder fetches the same key with ``dec_keys``.  Any failure,
QKD included, aborts the handshake.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
import uuid
from dataclasses import dataclass, field, replace
from typing import Protocol

from ..dual_sig import DUAL_SIGNATURE_BYTES, DualKeypair, VerifyingKeys, dual_sign, dual_verify
from ..errors import (
    AuthenticationError,
    DecodeError,
    HandshakeError,
    KeyConfirmationError,
    MalformedMessageError,
    PrimitiveError,
    QkdError,
)
from ..hybrid_kex import (
    HybridCiphertextBundle,
    HybridPrivateState,
    HybridPublicBundle,
    SecretBundle,
    SessionKeys,
    combine_secrets,
    derive_session_keys,
    hybrid_decapsulate,
    hybrid_encapsulate,
    hybrid_keygen,
)
from ..primitives import RandomSource, resolve_rng
from ..qkd.pool import QkdKey
from ..suites import HybridSuite, get_suite
from .wire import MAC_BYTES, RANDOM_BYTES, Flight1, Flight2, Flight3

log = logging.getLogger(__name__)

INITIATOR_SIG_LABEL = b"hybridkex initiator signature"
RESPONDER_SIG_LABEL = b"hybridkex responder signature"
RESPONDER_CONFIRM_LABEL = b"responder-confirm"
INITIATOR_CONFIRM_LABEL = b"initiator-confirm"

INITIATOR = "initiator"
RESPONDER = "responder"


class QkdLink(Protocol):
    """Where a handshake peer gets its QKD key.

    The initiator calls :meth:`fetch_new` (ETSI ``enc_keys``); the
    responder calls :meth:`fetch` with the received key_ID (``dec_keys``).
    """

    def fetch_new(self) -> QkdKey: ...

    def fetch(self, key_id: uuid.UUID) -> QkdKey: ...


class EtsiQkdLink:
    def __init__(self, client, own_sae_id: str, peer_sae_id: str) -> None:
        self.client = client
        self.own_sae_id = own_sae_id
        self.peer_sae_id = peer_sae_id

    def fetch_new(self) -> QkdKey:
        return self.client.get_enc_keys(self.peer_sae_id, 1)[0]

    def fetch(self, key_id: uuid.UUID) -> QkdKey:
        return self.client.get_dec_keys(self.peer_sae_id, [key_id])[0]


@dataclass(frozen=True)
class HandshakeConfig:
    suite: HybridSuite
    role: str
    keypair: DualKeypair = field(repr=False)
    peer: VerifyingKeys
    qkd: QkdLink | None = None
    address: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "suite", get_suite(self.suite))
        if self.role not in (INITIATOR, RESPONDER):
            raise ValueError(f"role must be {INITIATOR!r} or {RESPONDER!r}")


class Transcript:
    """Running SHA-256 over the exact flight bytes."""

    def __init__(self) -> None:
        self._h = hashlib.sha256()

    def update(self, data: bytes) -> None:
        self._h.update(data)

    def digest(self) -> bytes:
        return self._h.copy().digest()

    def copy(self) -> Transcript:
        t = Transcript()
        t._h = self._h.copy()
        return t


def _mac(key: bytes, label: bytes, th: bytes) -> bytes:
    return hmac.new(key, label + th, hashlib.sha256).digest()


@dataclass
class InitiatorState:
    cfg: HandshakeConfig
    private: HybridPrivateState = field(repr=False)
    qkd_key: bytes = field(repr=False)
    transcript: Transcript


@dataclass
class ResponderState:
    cfg: HandshakeConfig
    keys: SessionKeys = field(repr=False)
    transcript: Transcript
    expected_mac: bytes = field(repr=False)


@dataclass(frozen=True)
class HandshakeResult:
    keys: SessionKeys = field(repr=False)
    transcript_hash: bytes


def _decode(cls, data):
    if isinstance(data, cls):
        return data.to_bytes(), data
    try:
        return bytes(data), cls.from_bytes(bytes(data))
    except MalformedMessageError:
        raise
    except DecodeError as exc:
        raise MalformedMessageError(str(exc)) from exc


def initiator_start(cfg: HandshakeConfig, rng: RandomSource | None = None) -> tuple[InitiatorState, Flight1]:
    if cfg.role != INITIATOR:
        raise HandshakeError("initiator_start needs an initiator config")
    rng = resolve_rng(rng)
    suite = cfg.suite
    pub, priv = hybrid_keygen(suite, rng)

    qkd_key = b""
    key_id = None
    if cfg.qkd is not None:
        try:
            k = cfg.qkd.fetch_new()
        except QkdError:
            raise
        except Exception as exc:  # noqa: BLE001 - fail closed on any link problem
            raise QkdError(f"QKD key retrieval failed: {exc}") from exc
        qkd_key, key_id = k.key, k.key_id.bytes

    unsigned = Flight1(
        suite.id,
        rng.randbytes(RANDOM_BYTES),
        pub.classical_pub,
        pub.pq_pub,
        rng.randbytes(suite.extra_flight1_bytes),
        key_id,
        bytes(DUAL_SIGNATURE_BYTES),
    )
    prefix = unsigned.to_bytes()[:unsigned.signed_prefix_len()]
    t = Transcript()
    t.update(prefix)
    sig = dual_sign(cfg.keypair, INITIATOR_SIG_LABEL + t.digest()).to_bytes()
    f1 = replace(unsigned, signature=sig)
    t.update(f1.to_bytes()[len(prefix):])
    log.debug("initiator: sent flight1 for %s (qkd=%s)", suite.label, key_id is not None)
    return InitiatorState(cfg, priv, qkd_key, t), f1


def responder_respond(
    cfg: HandshakeConfig, f1: Flight1 | bytes, rng: RandomSource | None = None
) -> tuple[ResponderState, Flight2]:
    if cfg.role != RESPONDER:
        raise HandshakeError("responder_respond needs a responder config")
    rng = resolve_rng(rng)
    raw, f1 = _decode(Flight1, f1)
    suite = cfg.suite
    if f1.suite_id != suite.id:
        raise MalformedMessageError(f"suite {f1.suite_id} is not the configured suite {suite.id}")

    t = Transcript()
    split = f1.signed_prefix_len()
    t.update(raw[:split])
    if not dual_verify(cfg.peer, INITIATOR_SIG_LABEL + t.digest(), f1.signature):
        raise AuthenticationError("initiator dual signature rejected")
    t.update(raw[split:])

    if (f1.qkd_key_id is None) != (cfg.qkd is None):
        raise QkdError("QKD usage differs between peers; refusing to downgrade")
    qkd_key = b""
    if f1.qkd_key_id is not None:
        try:
            qkd_key = cfg.qkd.fetch(uuid.UUID(bytes=f1.qkd_key_id)).key
        except QkdError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise QkdError(f"QKD key retrieval failed: {exc}") from exc

    peer = HybridPublicBundle(suite.id, f1.classical_pub, f1.pq_pub)
    try:
        ct, ecdh_ss, kem_ss = hybrid_encapsulate(suite, peer, rng)
    except PrimitiveError as exc:
        raise MalformedMessageError(f"initiator key share rejected: {exc}") from exc

    unsigned = Flight2(suite.id, rng.randbytes(RANDOM_BYTES), ct.classical_pub, ct.pq_ct,
                       bytes(DUAL_SIGNATURE_BYTES), bytes(MAC_BYTES))
    enc = unsigned.to_bytes()
    sig_at, mac_at = unsigned.signed_prefix_len(), unsigned.mac_prefix_len()
    t.update(enc[:sig_at])
    th = t.digest()
    keys = derive_session_keys(combine_secrets(SecretBundle(ecdh_ss, kem_ss, qkd_key)), th)
    sig = dual_sign(cfg.keypair, RESPONDER_SIG_LABEL + th).to_bytes()

    with_sig = replace(unsigned, signature=sig)
    t.update(with_sig.to_bytes()[sig_at:mac_at])
    mac_r = _mac(keys.mac_key, RESPONDER_CONFIRM_LABEL, t.digest())
    f2 = replace(with_sig, confirm_mac=mac_r)
    t.update(f2.to_bytes()[mac_at:])
    expected = _mac(keys.mac_key, INITIATOR_CONFIRM_LABEL, t.digest())
    return ResponderState(cfg, keys, t, expected), f2


def initiator_finish(state: InitiatorState, f2: Flight2 | bytes) -> tuple[SessionKeys, Flight3]:
    cfg = state.cfg
    suite = cfg.suite
    raw, f2 = _decode(Flight2, f2)
    if f2.suite_id != suite.id:
        raise MalformedMessageError("responder answered with a different suite")
    t = state.transcript
    sig_at, mac_at = f2.signed_prefix_len(), f2.mac_prefix_len()
    t.update(raw[:sig_at])
    th = t.digest()
    if not dual_verify(cfg.peer, RESPONDER_SIG_LABEL + th, f2.signature):
        raise AuthenticationError("responder dual signature rejected")

    try:
        ecdh_ss, kem_ss = hybrid_decapsulate(
            suite, state.private, HybridCiphertextBundle(suite.id, f2.classical_pub, f2.pq_ct)
        )
    except PrimitiveError as exc:
        raise KeyConfirmationError(f"could not recover shared secret: {exc}") from exc
    keys = derive_session_keys(combine_secrets(SecretBundle(ecdh_ss, kem_ss, state.qkd_key)), th)

    t.update(raw[sig_at:mac_at])
    if not hmac.compare_digest(f2.confirm_mac, _mac(keys.mac_key, RESPONDER_CONFIRM_LABEL, t.digest())):
        raise KeyConfirmationError("responder key confirmation failed")
    t.update(raw[mac_at:])
    f3 = Flight3(suite.id, _mac(keys.mac_key, INITIATOR_CONFIRM_LABEL, t.digest()))
    t.update(f3.to_bytes())
    return keys, f3


def responder_finish(state: ResponderState, f3: Flight3 | bytes) -> SessionKeys:
    raw, f3 = _decode(Flight3, f3)
    if f3.suite_id != state.cfg.suite.id:
        raise MalformedMessageError("flight3 suite mismatch")
    if not hmac.compare_digest(f3.confirm_mac, state.expected_mac):
        raise KeyConfirmationError("initiator key confirmation failed")
    state.transcript.update(raw)
    return state.keys
