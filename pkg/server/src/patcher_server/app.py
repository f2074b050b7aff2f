"""WSGI application speaking wire protocol v1.

Routes: GET /v1/health, POST /v1/generate, /v1/similarity, /v1/suggest,
/v1/embed. Every request is validated before the engine is touched; a
malformed one is answered 400 with {"error": reason}. Errors always
travel as non-200 JSON bodies with an "error" field.

Concurrency: generations run one at a time behind an in-flight gate
with a bounded admission queue — overflow is answered 429 so clients
back off and retry. Scoring, suggestion, and embedding bypass the gate
and may run concurrently with a generation in progress. Until the
engine is ready every model route (health included) answers 503.
"""

from __future__ import annotations

import json
import threading
from http.client import responses as _REASONS
from pathlib import Path

from .config import ServerConfig
from .engine import ModelEngine, SimulatorEngine, UnknownImage, UpstreamFailure

_MAX_BODY = 1 << 20  # 1 MiB of JSON is already an unreasonable request


class _BadRequest(Exception):
    """Validation failure; the message goes back verbatim as the error."""


def _require_str(body: dict, name: str, *, blank_ok: bool = False) -> str:
    value = body.get(name)
    if not isinstance(value, str) or (not blank_ok and not value.strip()):
        raise _BadRequest(f"{name} must be a non-empty string")
    return value


def _require_seed(body: dict) -> int:
    value = body.get("seed")
    if isinstance(value, bool) or not isinstance(value, int):
        raise _BadRequest("seed must be an integer")
    return value


class ModelServerApp:
    """The sidecar as a WSGI callable."""

    def __init__(
        self,
        engine: ModelEngine | None = None,
        config: ServerConfig | None = None,
        *,
        ready: bool = True,
    ):
        self.config = config or ServerConfig()
        self.engine = engine if engine is not None else SimulatorEngine(
            model_id=self.config.model_id
        )
        self._ready = threading.Event()
        if ready:
            self._ready.set()
        self._in_flight = threading.Lock()
        self._slots = threading.BoundedSemaphore(self.config.max_pending)
        self._admitted = 0
        self._admitted_lock = threading.Lock()
        if self.config.image_store is not None:
            Path(self.config.image_store).mkdir(parents=True, exist_ok=True)
        self._routes = {
            "/v1/health": {"GET": self._health},
            "/v1/generate": {"POST": self._generate},
            "/v1/similarity": {"POST": self._similarity},
            "/v1/suggest": {"POST": self._suggest},
            "/v1/embed": {"POST": self._embed},
        }

    # ----- lifecycle -----

    def mark_ready(self) -> None:
        self._ready.set()

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    @property
    def pending(self) -> int:
        """Generation requests currently admitted (in flight + queued)."""
        with self._admitted_lock:
            return self._admitted

    # ----- WSGI entry point -----

    def __call__(self, environ, start_response):
        method = environ.get("REQUEST_METHOD", "GET")
        path = environ.get("PATH_INFO", "/")
        handlers = self._routes.get(path)
        if handlers is None:
            status, body = 404, {"error": f"no such endpoint {path}"}
        elif method not in handlers:
            status, body = 405, {"error": f"{method} not allowed on {path}"}
        elif not self._ready.is_set():
            status, body = 503, {"error": "model is loading"}
        else:
            try:
                payload = self._read_json(environ) if method == "POST" else {}
                status, body = handlers[method](payload)
            except _BadRequest as exc:
                status, body = 400, {"error": str(exc)}
            except UnknownImage as exc:
                status, body = 404, {"error": f"unknown image_id {exc}"}
            except UpstreamFailure as exc:
                status, body = 502, {"error": f"suggestion upstream failed: {exc}"}
            except Exception as exc:  # noqa: BLE001 - the wire needs a body either way
                status, body = 500, {"error": f"{type(exc).__name__}: {exc}"}
        raw = json.dumps(body).encode("utf-8")
        reason = _REASONS.get(status, "Unknown")
        start_response(
            f"{status} {reason}",
            [("Content-Type", "application/json"),
             ("Content-Length", str(len(raw)))],
        )
        return [raw]

    @staticmethod
    def _read_json(environ) -> dict:
        try:
            length = int(environ.get("CONTENT_LENGTH") or 0)
        except ValueError:
            length = 0
        if length > _MAX_BODY:
            raise _BadRequest("request body too large")
        raw = environ["wsgi.input"].read(length) if length else b""
        if not raw:
            raise _BadRequest("request body must be JSON")
        try:
            body = json.loads(raw)
        except ValueError:
            raise _BadRequest("request body is not valid JSON") from None
        if not isinstance(body, dict):
            raise _BadRequest("request body must be a JSON object")
        return body

    # ----- backpressure -----

    def _admit(self) -> bool:
        if not self._slots.acquire(blocking=False):
            return False
        with self._admitted_lock:
            self._admitted += 1
        return True

    def _release(self) -> None:
        with self._admitted_lock:
            self._admitted -= 1
        self._slots.release()

    # ----- routes -----

    def _health(self, _body: dict):
        return 200, {
            "status": "ok",
            "model": self.engine.model_id,
            "device": self.config.device,
            "attention": self.config.attention_readout,
            "queue_capacity": self.config.max_pending,
        }

    def _generate(self, body: dict):
        prompt = _require_str(body, "prompt")
        seed = _require_seed(body)
        if not self._admit():
            return 429, {"error": "generation queue is full"}
        try:
            with self._in_flight:
                image = self.engine.generate(prompt, seed)
        finally:
            self._release()
        self._persist(image.image_id, image.record)
        return 200, {
            "image_id": image.image_id,
            "tokens": list(image.tokens),
            "attention": list(image.attention),
        }

    def _similarity(self, body: dict):
        image_id = _require_str(body, "image_id")
        text = _require_str(body, "text")
        return 200, {"score": self.engine.similarity(image_id, text)}

    def _suggest(self, body: dict):
        template = _require_str(body, "template")
        obj = _require_str(body, "object")
        prompt = body.get("prompt")
        if prompt is not None and not isinstance(prompt, str):
            raise _BadRequest("prompt must be a string or null")
        try:
            items = self.engine.suggest(template, obj, prompt)
        except ValueError as exc:
            raise _BadRequest(str(exc)) from None
        return 200, {"items": list(items)}

    def _embed(self, body: dict):
        text = _require_str(body, "text")
        return 200, {"vector": self.engine.embed(text)}

    # ----- image store -----

    def _persist(self, image_id: str, record: dict) -> None:
        if self.config.image_store is None:
            return
        path = Path(self.config.image_store) / f"{image_id}.json"
        path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")


__all__ = ["ModelServerApp"]
