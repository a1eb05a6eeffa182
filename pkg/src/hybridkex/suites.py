"""Registry of the ten hybrid key-exchange suites.

Each suite pairs one ECDH group with one post-quantum KEM.  Byte sizes come
from the published parameter tables of each primitive; labels, strength
estimates and the two accounting oddities (the 48-byte surplus on the plain
FrodoKEM rows and the McEliece total) reproduce the evaluated table as-is.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from types import MappingProxyType

from .errors import UnknownSuiteError

__all__ = [
    "ClassicalGroup",
    "PqKem",
    "HybridSuite",
    "CLASSICAL_GROUPS",
    "PQ_KEMS",
    "list_suites",
    "get_suite",
    "strength_estimate",
    "size_profile",
]


class ClassicalName(str, enum.Enum):
    X25519 = "X25519"
    X448 = "X448"


class KemName(str, enum.Enum):
    MLKEM512 = "MLKEM512"
    MLKEM768 = "MLKEM768"
    MLKEM1024 = "MLKEM1024"
    KYBER768_DRAFT = "KYBER768_DRAFT"
    FRODO976_SHAKE = "FRODO976_SHAKE"
    FRODO976_AES = "FRODO976_AES"
    MCELIECE = "MCELIECE"


@dataclass(frozen=True)
class ClassicalGroup:
    name: ClassicalName
    public_key_bytes: int
    shared_secret_bytes: int
    strength_bits: int


@dataclass(frozen=True)
class PqKem:
    name: KemName
    public_key_bytes: int
    ciphertext_bytes: int
    shared_secret_bytes: int
    nist_level_bits: int
    # concrete parameter set behind the name
    parameter_set: str

    def __post_init__(self) -> None:
        if self.nist_level_bits not in (128, 192, 256):
            raise ValueError(f"nist_level_bits must be 128/192/256, got {self.nist_level_bits}")


@dataclass(frozen=True)
class HybridSuite:
    id: int
    label: str
    classical: ClassicalGroup
    pq: PqKem
    strength_pqc_bits: int
    strength_classical_bits: int
    extra_flight1_bytes: int = 0
    accounting_override_total: int | None = None
    accounting_override_packets: int | None = None

    @property
    def unverified(self) -> bool:
        """True when the byte/packet columns are copied rather than computed."""
        return self.accounting_override_total is not None

    def __str__(self) -> str:
        return self.label


CLASSICAL_GROUPS = MappingProxyType(
    {
        ClassicalName.X25519: ClassicalGroup(ClassicalName.X25519, 32, 32, 128),
        ClassicalName.X448: ClassicalGroup(ClassicalName.X448, 56, 56, 224),
    }
)

PQ_KEMS = MappingProxyType(
    {
        KemName.MLKEM512: PqKem(KemName.MLKEM512, 800, 768, 32, 128, "ML-KEM-512"),
        KemName.MLKEM768: PqKem(KemName.MLKEM768, 1184, 1088, 32, 192, "ML-KEM-768"),
        KemName.MLKEM1024: PqKem(KemName.MLKEM1024, 1568, 1568, 32, 256, "ML-KEM-1024"),
        # the draft Kyber-768 row is carried by ML-KEM-768; sizes are identical
        KemName.KYBER768_DRAFT: PqKem(KemName.KYBER768_DRAFT, 1184, 1088, 32, 192, "ML-KEM-768"),
        KemName.FRODO976_SHAKE: PqKem(KemName.FRODO976_SHAKE, 15632, 15744, 24, 192, "FrodoKEM-976-SHAKE"),
        KemName.FRODO976_AES: PqKem(KemName.FRODO976_AES, 15632, 15744, 24, 192, "FrodoKEM-976-AES"),
        KemName.MCELIECE: PqKem(KemName.MCELIECE, 261120, 96, 32, 128, "mceliece348864"),
    }
)

_FRODO_EXTRA = 48
_MCELIECE_TABLE_BYTES = 200722
_MCELIECE_TABLE_PACKETS = 139


def _suite(id_: int, label: str, classical: ClassicalName, pq: KemName, **kw) -> HybridSuite:
    group = CLASSICAL_GROUPS[classical]
    kem = PQ_KEMS[pq]
    return HybridSuite(
        id=id_,
        label=label,
        classical=group,
        pq=kem,
        strength_pqc_bits=kem.nist_level_bits,
        strength_classical_bits=group.strength_bits,
        **kw,
    )


_X, _X448 = ClassicalName.X25519, ClassicalName.X448

_REGISTRY: tuple[HybridSuite, ...] = (
    _suite(1, "X25519-Kyber768-Draft00", _X, KemName.KYBER768_DRAFT),
    _suite(2, "X25519-MLKE512M-Draft00", _X, KemName.MLKEM512),
    _suite(3, "X25519-MLKE768M-Draft00", _X, KemName.MLKEM768),
    _suite(4, "X25519-MLKE1024M-Draft00", _X, KemName.MLKEM1024),
    _suite(5, "X448-MLKEM768-Draft00", _X448, KemName.MLKEM768),
    _suite(6, "X25519e-FrodoKEM976-SHAKEDraft00", _X, KemName.FRODO976_SHAKE),
    _suite(7, "X25519-FrodoKEM976-SHAKEDraft00", _X, KemName.FRODO976_SHAKE, extra_flight1_bytes=_FRODO_EXTRA),
    _suite(8, "X25519e-FrodoKEM976-AESDraft00", _X, KemName.FRODO976_AES),
    _suite(9, "X25519-FrodoKEM976-AESDraft00", _X, KemName.FRODO976_AES, extra_flight1_bytes=_FRODO_EXTRA),
    _suite(
        10,
        "X25519-Mceliece-Draft00",
        _X,
        KemName.MCELIECE,
        accounting_override_total=_MCELIECE_TABLE_BYTES,
        accounting_override_packets=_MCELIECE_TABLE_PACKETS,
    ),
)

_BY_ID = MappingProxyType({s.id: s for s in _REGISTRY})
_BY_KEY = MappingProxyType({s.label.lower(): s for s in _REGISTRY})

# The table spells three rows "MLKE<n>M"; accept the regular "MLKEM<n>" too.
_ALIAS_RE = re.compile(r"^(x25519)-mlkem(512|768|1024)-draft00$")


def list_suites() -> list[HybridSuite]:
    """All ten suites, in table row order."""
    return list(_REGISTRY)


def get_suite(key: str | int | HybridSuite) -> HybridSuite:
    """Look a suite up by label (case-insensitive), alias, or wire id."""
    if isinstance(key, HybridSuite):
        if _BY_ID.get(key.id) != key:
            raise UnknownSuiteError(f"suite {key.label!r} is not registered")
        return key
    if isinstance(key, int):
        try:
            return _BY_ID[key]
        except KeyError:
            raise UnknownSuiteError(f"no suite with id {key}") from None
    norm = key.strip().lower()
    if norm in _BY_KEY:
        return _BY_KEY[norm]
    m = _ALIAS_RE.match(norm)
    if m:
        return _BY_KEY[f"{m.group(1)}-mlke{m.group(2)}m-draft00"]
    raise UnknownSuiteError(f"unknown suite {key!r}")


def strength_estimate(suite: HybridSuite | str | int) -> tuple[int, int]:
    s = get_suite(suite)
    return s.strength_pqc_bits, s.strength_classical_bits


def size_profile(suite: HybridSuite | str | int) -> tuple[int, int, int, int]:
    """(classical_pk, pq_pk, pq_ct, extra_flight1) in bytes."""
    s = get_suite(suite)
    return (
        s.classical.public_key_bytes,
        s.pq.public_key_bytes,
        s.pq.ciphertext_bytes,
        s.extra_flight1_bytes,
    )
