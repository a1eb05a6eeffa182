"""ETSI GS QKD 014 client.

Fail-closed: transport problems raise :class:`QkdNetworkError`, any non-2xx
answer or malformed body raises :class:`QkdProtocolError`.
"""

from __future__ import annotations

import base64
import binascii
import uuid

import requests

from ..errors import QkdNetworkError, QkdProtocolError
from .pool import KmeStatus, QkdKey


class KmeClient:
    def __init__(self, base_url: str, timeout: float = 5.0, session: requests.Session | None = None) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._http = session or requests.Session()

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"
        try:
            resp = self._http.request(method, url, json=body, timeout=self.timeout)
        except requests.RequestException as exc:
            raise QkdNetworkError(f"{method} {url}: {exc}") from exc
        try:
            payload = resp.json()
        except ValueError:
            payload = None
        if not 200 <= resp.status_code < 300:
            msg = payload.get("message", resp.reason) if isinstance(payload, dict) else resp.reason
            raise QkdProtocolError(resp.status_code, str(msg))
        if not isinstance(payload, dict):
            raise QkdProtocolError(resp.status_code, "response body is not a JSON object")
        return payload

    @staticmethod
    def _keys(payload: dict) -> list[QkdKey]:
        try:
            return [
                QkdKey(uuid.UUID(k["key_ID"]), base64.b64decode(k["key"], validate=True))
                for k in payload["keys"]
            ]
        except (KeyError, TypeError, ValueError, binascii.Error) as exc:
            raise QkdProtocolError(200, f"malformed key container: {exc}") from exc

    def get_status(self, slave_sae_id: str) -> KmeStatus:
        payload = self._request("GET", f"/api/v1/keys/{slave_sae_id}/status")
        try:
            return KmeStatus.from_json(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise QkdProtocolError(200, f"malformed status: {exc}") from exc

    def get_enc_keys(self, slave_sae_id: str, number: int = 1, size_bits: int | None = None) -> list[QkdKey]:
        body: dict = {"number": number}
        if size_bits is not None:
            body["size"] = size_bits
        keys = self._keys(self._request("POST", f"/api/v1/keys/{slave_sae_id}/enc_keys", body))
        if len(keys) != number:
            raise QkdProtocolError(200, f"asked for {number} keys, got {len(keys)}")
        return keys

    def get_dec_keys(self, master_sae_id: str, key_ids: list[uuid.UUID | str]) -> list[QkdKey]:
        body = {"key_IDs": [{"key_ID": str(k)} for k in key_ids]}
        keys = self._keys(self._request("POST", f"/api/v1/keys/{master_sae_id}/dec_keys", body))
        if [str(k.key_id) for k in keys] != [str(uuid.UUID(str(k))) for k in key_ids]:
            raise QkdProtocolError(200, "KME returned keys for different key_IDs")
        return keys

    def advance_epoch(self) -> int:
        """Simulator-only admin call."""
        return int(self._request("POST", "/admin/epoch/advance", {})["epoch"])


def client_get_status(kme_endpoint: str, slave_sae_id: str) -> KmeStatus:
    return KmeClient(kme_endpoint).get_status(slave_sae_id)


def client_get_enc_keys(kme_endpoint: str, slave_sae_id: str, number: int = 1, size_bits: int | None = None) -> list[QkdKey]:
    return KmeClient(kme_endpoint).get_enc_keys(slave_sae_id, number, size_bits)


def client_get_dec_keys(kme_endpoint: str, master_sae_id: str, key_ids: list[uuid.UUID | str]) -> list[QkdKey]:
    return KmeClient(kme_endpoint).get_dec_keys(master_sae_id, key_ids)
