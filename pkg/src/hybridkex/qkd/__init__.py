"""QKD key delivery: ETSI 014 client and a deterministic mock KME."""

from .client import KmeClient, client_get_dec_keys, client_get_enc_keys, client_get_status
from .pool import (
    EpochPool,
    KeyManagementEntity,
    KmeConfig,
    KmeStatus,
    QkdKey,
    sim_advance_epoch,
    sim_generate_pool,
)
from .server import KmeHttpServer, make_server

__all__ = [
    "EpochPool",
    "KeyManagementEntity",
    "KmeClient",
    "KmeConfig",
    "KmeHttpServer",
    "KmeStatus",
    "QkdKey",
    "client_get_dec_keys",
    "client_get_enc_keys",
    "client_get_status",
    "make_server",
    "sim_advance_epoch",
    "sim_generate_pool",
]
