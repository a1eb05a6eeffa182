"""HTTP front end for the mock KME (ETSI GS QKD 014 REST shape)."""

from __future__ import annotations

import base64
import json
import logging
import re
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import QkdProtocolError
from .pool import KeyManagementEntity, KmeConfig, QkdKey

log = logging.getLogger(__name__)

_ROUTE = re.compile(r"^/api/v1/keys/(?P<sae>[^/]+)/(?P<op>status|enc_keys|dec_keys)$")
_MAX_BODY = 1 << 20


def key_container(keys: list[QkdKey]) -> dict:
    return {
        "keys": [
            {"key_ID": str(k.key_id), "key": base64.b64encode(k.key).decode("ascii")}
            for k in keys
        ]
    }


class _Handler(BaseHTTPRequestHandler):
    server: KmeHttpServer
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # route access logs through logging
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length > _MAX_BODY:
            raise QkdProtocolError(413, "request body too large")
        raw = self.rfile.read(length) if length else b"{}"
        try:
            obj = json.loads(raw or b"{}")
        except json.JSONDecodeError:
            raise QkdProtocolError(400, "body is not valid JSON") from None
        if not isinstance(obj, dict):
            raise QkdProtocolError(400, "body must be a JSON object")
        return obj

    def _dispatch(self, method: str) -> None:
        kme = self.server.kme
        try:
            path = self.path.split("?", 1)[0]
            if method == "POST" and path == "/admin/epoch/advance":
                self._body()
                self._send(200, {"epoch": kme.advance_epoch()})
                return
            m = _ROUTE.match(path)
            if m is None:
                raise QkdProtocolError(404, f"no route for {method} {path}")
            sae, op = m.group("sae"), m.group("op")
            if op == "status" and method == "GET":
                self._send(200, kme.status(sae).to_json())
            elif op == "enc_keys" and method == "POST":
                body = self._body()
                number = body.get("number", 1)
                size = body.get("size")
                if not isinstance(number, int) or isinstance(number, bool):
                    raise QkdProtocolError(400, "number must be an integer")
                if size is not None and (not isinstance(size, int) or isinstance(size, bool)):
                    raise QkdProtocolError(400, "size must be an integer")
                self._send(200, key_container(kme.enc_keys(sae, number, size)))
            elif op == "dec_keys" and method == "POST":
                body = self._body()
                ids = body.get("key_IDs")
                if not isinstance(ids, list) or not all(isinstance(x, dict) and "key_ID" in x for x in ids):
                    raise QkdProtocolError(400, "key_IDs must be a list of {\"key_ID\": ...} objects")
                self._send(200, key_container(kme.dec_keys(sae, [x["key_ID"] for x in ids])))
            else:
                raise QkdProtocolError(405, f"{method} not allowed on {op}")
        except QkdProtocolError as exc:
            self._send(exc.status, {"message": exc.message})
        except Exception:  # noqa: BLE001
            log.exception("KME request failed")
            self._send(HTTPStatus.SERVICE_UNAVAILABLE, {"message": "internal KME error"})

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")


class KmeHttpServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, kme: KeyManagementEntity, host: str = "127.0.0.1", port: int = 0) -> None:
        self.kme = kme
        super().__init__((host, port), _Handler)
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> KmeHttpServer:
        """Serve on a background thread (used by tests and embedding)."""
        self._thread = threading.Thread(target=self.serve_forever, name="kme-http", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> KmeHttpServer:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must be host:port, got {addr!r}")
    return host.strip("[]"), int(port)


def make_server(config: KmeConfig, listen_addr: str | None = None) -> KmeHttpServer:
    host, port = parse_addr(listen_addr or config.listen_addr)
    return KmeHttpServer(KeyManagementEntity(config), host, port)
