"""Deterministic epoch key pools and the mock KME state machine.

Two KME processes configured with the same ``link_seed`` and ``epoch``
regenerate identical pools, which is how the simulator stands in for a
shared quantum channel.  Key ``i`` of epoch ``e`` is

    key    = KDF2-SHA256(link_seed || I2OSP(e, 8) || I2OSP(i, 4), size_bits / 8)
    key_ID = UUID(version=5) over SHA-256 of the same tuple, first 16 bytes
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import QkdProtocolError
from ..hybrid_kex import kdf2_sha256

__all__ = [
    "QkdKey",
    "KmeStatus",
    "EpochPool",
    "KmeConfig",
    "KeyManagementEntity",
    "sim_generate_pool",
    "sim_advance_epoch",
]


@dataclass(frozen=True)
class QkdKey:
    key_id: uuid.UUID
    key: bytes = field(repr=False)
    # the ETSI 014 key container does not carry the epoch, so keys read
    # back from a KME over HTTP leave this unset
    epoch: int | None = None


@dataclass(frozen=True)
class KmeStatus:
    source_kme_id: str
    target_kme_id: str
    master_sae_id: str
    slave_sae_id: str
    key_size: int
    stored_key_count: int
    max_key_count: int
    max_key_per_request: int

    def to_json(self) -> dict:
        return {
            "source_kme_id": self.source_kme_id,
            "target_kme_id": self.target_kme_id,
            "master_sae_id": self.master_sae_id,
            "slave_sae_id": self.slave_sae_id,
            "key_size": self.key_size,
            "stored_key_count": self.stored_key_count,
            "max_key_count": self.max_key_count,
            "max_key_per_request": self.max_key_per_request,
        }

    @classmethod
    def from_json(cls, obj: dict) -> KmeStatus:
        return cls(
            source_kme_id=str(obj["source_kme_id"]),
            target_kme_id=str(obj["target_kme_id"]),
            master_sae_id=str(obj["master_sae_id"]),
            slave_sae_id=str(obj["slave_sae_id"]),
            key_size=int(obj["key_size"]),
            stored_key_count=int(obj["stored_key_count"]),
            max_key_count=int(obj["max_key_count"]),
            max_key_per_request=int(obj["max_key_per_request"]),
        )


def _tuple_bytes(link_seed: bytes, epoch: int, index: int) -> bytes:
    return link_seed + epoch.to_bytes(8, "big") + index.to_bytes(4, "big")


def _key_id(link_seed: bytes, epoch: int, index: int) -> uuid.UUID:
    digest = hashlib.sha256(_tuple_bytes(link_seed, epoch, index)).digest()
    return uuid.UUID(bytes=digest[:16], version=5)


@dataclass
class EpochPool:
    link_seed: bytes = field(repr=False)
    epoch: int
    size_bits: int
    keys: tuple[QkdKey, ...]
    master_delivered: set[uuid.UUID] = field(default_factory=set)
    slave_delivered: set[uuid.UUID] = field(default_factory=set)

    def __post_init__(self) -> None:
        self._index = {k.key_id: k for k in self.keys}

    def lookup(self, key_id: uuid.UUID) -> QkdKey | None:
        return self._index.get(key_id)

    @property
    def stored_key_count(self) -> int:
        return len(self.keys) - len(self.master_delivered)


def sim_generate_pool(link_seed: bytes, epoch: int, count: int, size_bits: int) -> EpochPool:
    if count < 1:
        raise ValueError("count must be >= 1")
    if size_bits <= 0 or size_bits % 8:
        raise ValueError("size_bits must be a positive multiple of 8")
    if epoch < 0:
        raise ValueError("epoch must be non-negative")
    keys = tuple(
        QkdKey(
            key_id=_key_id(link_seed, epoch, i),
            key=kdf2_sha256(_tuple_bytes(link_seed, epoch, i), size_bits // 8),
            epoch=epoch,
        )
        for i in range(count)
    )
    return EpochPool(link_seed, epoch, size_bits, keys)


def sim_advance_epoch(pool: EpochPool) -> EpochPool:
    """Fresh pool for ``epoch + 1``; nothing from the old epoch survives."""
    return sim_generate_pool(pool.link_seed, pool.epoch + 1, len(pool.keys), pool.size_bits)


@dataclass(frozen=True)
class KmeConfig:
    link_seed: bytes = field(repr=False)
    epoch: int = 0
    key_count: int = 64
    key_size_bits: int = 256
    master_sae_id: str = "sae-master"
    slave_sae_id: str = "sae-slave"
    listen_addr: str = "127.0.0.1:8014"
    max_key_per_request: int = 128

    @classmethod
    def from_json(cls, obj: dict) -> KmeConfig:
        known = {
            "link_seed_hex", "epoch", "key_count", "key_size_bits", "master_sae_id",
            "slave_sae_id", "listen_addr", "max_key_per_request",
        }
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown KME config keys: {sorted(unknown)}")
        kw = {k: obj[k] for k in known - {"link_seed_hex"} if k in obj}
        return cls(link_seed=bytes.fromhex(obj["link_seed_hex"]), **kw)

    @classmethod
    def load(cls, path: str | Path) -> KmeConfig:
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_json(self) -> dict:
        return {
            "link_seed_hex": self.link_seed.hex(),
            "epoch": self.epoch,
            "key_count": self.key_count,
            "key_size_bits": self.key_size_bits,
            "master_sae_id": self.master_sae_id,
            "slave_sae_id": self.slave_sae_id,
            "listen_addr": self.listen_addr,
            "max_key_per_request": self.max_key_per_request,
        }


class KeyManagementEntity:
    """Mock KME serving one master/slave SAE link.

    Each key may be delivered once through ``enc_keys`` (master side) and
    once through ``dec_keys`` (slave side).  All pool mutation happens under
    one lock, so delivery is exactly-once per side under concurrent clients.
    """

    def __init__(self, config: KmeConfig) -> None:
        self.config = config
        self._lock = threading.Lock()
        self._pool = sim_generate_pool(
            config.link_seed, config.epoch, config.key_count, config.key_size_bits
        )

    @property
    def epoch(self) -> int:
        return self._pool.epoch

    def _require_sae(self, given: str, expected: str, role: str) -> None:
        if given != expected:
            raise QkdProtocolError(404, f"unknown {role} SAE ID {given!r}")

    def status(self, slave_sae_id: str) -> KmeStatus:
        cfg = self.config
        self._require_sae(slave_sae_id, cfg.slave_sae_id, "slave")
        with self._lock:
            stored = self._pool.stored_key_count
        return KmeStatus(
            source_kme_id=f"kme-{cfg.master_sae_id}",
            target_kme_id=f"kme-{cfg.slave_sae_id}",
            master_sae_id=cfg.master_sae_id,
            slave_sae_id=cfg.slave_sae_id,
            key_size=cfg.key_size_bits,
            stored_key_count=stored,
            max_key_count=cfg.key_count,
            max_key_per_request=cfg.max_key_per_request,
        )

    def enc_keys(self, slave_sae_id: str, number: int = 1, size: int | None = None) -> list[QkdKey]:
        cfg = self.config
        self._require_sae(slave_sae_id, cfg.slave_sae_id, "slave")
        if not isinstance(number, int) or number < 1:
            raise QkdProtocolError(400, "number must be a positive integer")
        if number > cfg.max_key_per_request:
            raise QkdProtocolError(400, f"number exceeds max_key_per_request ({cfg.max_key_per_request})")
        if size is not None and size != cfg.key_size_bits:
            raise QkdProtocolError(400, f"unsupported key size {size}; this KME serves {cfg.key_size_bits}")
        with self._lock:
            pool = self._pool
            fresh = [k for k in pool.keys if k.key_id not in pool.master_delivered][:number]
            if len(fresh) < number:
                raise QkdProtocolError(503, "insufficient keys")
            pool.master_delivered.update(k.key_id for k in fresh)
        return fresh

    def dec_keys(self, master_sae_id: str, key_ids: list[str | uuid.UUID]) -> list[QkdKey]:
        self._require_sae(master_sae_id, self.config.master_sae_id, "master")
        if not key_ids:
            raise QkdProtocolError(400, "key_IDs must not be empty")
        try:
            wanted = [k if isinstance(k, uuid.UUID) else uuid.UUID(str(k)) for k in key_ids]
        except ValueError:
            raise QkdProtocolError(400, "malformed key_ID") from None
        if len(set(wanted)) != len(wanted):
            raise QkdProtocolError(400, "duplicate key_ID in request")
        with self._lock:
            pool = self._pool
            out = []
            for kid in wanted:
                key = pool.lookup(kid)
                if key is None:
                    raise QkdProtocolError(404, f"unknown key_ID {kid}")
                if kid in pool.slave_delivered:
                    raise QkdProtocolError(400, f"key_ID {kid} already consumed")
                out.append(key)
            pool.slave_delivered.update(wanted)
        return out

    def advance_epoch(self) -> int:
        with self._lock:
            self._pool = sim_advance_epoch(self._pool)
            return self._pool.epoch
