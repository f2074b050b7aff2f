"""HTTP client for a model sidecar speaking the v1 wire protocol.

The sidecar carries the actual diffusion model, attention readout, and
scoring; this client only moves JSON and enforces the contract. Every
response is validated before it reaches the pipeline, so a misbehaving
server surfaces as ProtocolViolation instead of corrupt downstream math.

Transient failures (timeouts, connection errors, 429, 5xx) are retried
with exponential backoff; other non-200 answers raise ServerError at
once. Both the transport and the sleep function are injectable so tests
run without sockets or real delays.
"""

from __future__ import annotations

import math
import os
import time
from typing import Callable, Sequence

import httpx

from ..domain import GenerationRecord, Prompt, TokenAttentionPair
from ..errors import ProtocolViolation, RemoteError, RemoteTimeout, ServerError
from .base import TEMPLATE_KINDS

ENDPOINT_ENV = "PATCHER_ENDPOINT"
DEFAULT_TIMEOUT = 30.0
MAX_ATTEMPTS = 3
BACKOFF_BASE = 0.5  # seconds; doubles per retry
BACKOFF_CAP = 8.0


def resolve_endpoint(explicit: str | None = None) -> str:
    """Endpoint URL, letting the environment override configuration."""
    endpoint = os.environ.get(ENDPOINT_ENV) or explicit
    if not endpoint:
        raise RemoteError(
            f"no sidecar endpoint configured; pass one or set {ENDPOINT_ENV}"
        )
    return endpoint.rstrip("/")


def _require(body: dict, name: str, path: str):
    if name not in body:
        raise ProtocolViolation(f"{path}: response lacks field {name!r}")
    return body[name]


def _require_str(body: dict, name: str, path: str) -> str:
    value = _require(body, name, path)
    if not isinstance(value, str):
        raise ProtocolViolation(f"{path}: field {name!r} is not a string")
    return value


def _require_numbers(body: dict, name: str, path: str) -> list[float]:
    value = _require(body, name, path)
    if not isinstance(value, list):
        raise ProtocolViolation(f"{path}: field {name!r} is not an array")
    out: list[float] = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ProtocolViolation(f"{path}: field {name!r} holds a non-number")
        if not math.isfinite(item):
            raise ProtocolViolation(f"{path}: field {name!r} holds a non-finite value")
        out.append(float(item))
    return out


def _require_strings(body: dict, name: str, path: str) -> list[str]:
    value = _require(body, name, path)
    if not isinstance(value, list) or any(not isinstance(x, str) for x in value):
        raise ProtocolViolation(f"{path}: field {name!r} is not an array of strings")
    return list(value)


class RemoteBackend:
    """All four backend capabilities proxied to a sidecar over HTTP."""

    serial_only = False

    def __init__(
        self,
        endpoint: str | None = None,
        *,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = resolve_endpoint(endpoint)
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=self.endpoint,
            timeout=timeout,
            limits=httpx.Limits(max_connections=8, max_keepalive_connections=4),
            transport=transport,
        )
        self._embed_dim: int | None = None

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteBackend":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # ----- transport with retry -----

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        delay = BACKOFF_BASE
        failure: RemoteError | None = None
        for attempt in range(MAX_ATTEMPTS):
            try:
                response = self._client.request(method, path, json=payload)
            except httpx.TimeoutException as exc:
                failure = RemoteTimeout(f"{path}: {exc or 'timed out'}")
            except httpx.TransportError as exc:
                # unreachable endpoints behave like timeouts to callers
                failure = RemoteTimeout(f"{path}: {exc}")
            else:
                if response.status_code == 200:
                    return self._decode(response, path)
                message = self._error_message(response)
                error = ServerError(response.status_code, message)
                if response.status_code != 429 and response.status_code < 500:
                    raise error
                failure = error
            if attempt + 1 < MAX_ATTEMPTS:
                self._sleep(min(delay, BACKOFF_CAP))
                delay *= 2
        assert failure is not None
        raise failure

    @staticmethod
    def _decode(response: httpx.Response, path: str) -> dict:
        try:
            body = response.json()
        except ValueError as exc:
            raise ProtocolViolation(f"{path}: response body is not JSON") from exc
        if not isinstance(body, dict):
            raise ProtocolViolation(f"{path}: response body is not a JSON object")
        return body

    @staticmethod
    def _error_message(response: httpx.Response) -> str:
        try:
            body = response.json()
            if isinstance(body, dict) and isinstance(body.get("error"), str):
                return body["error"]
        except ValueError:
            pass
        return response.text[:200] or "no error detail"

    # ----- capabilities -----

    def health(self) -> str:
        """Model identifier reported by a healthy sidecar."""
        body = self._request("GET", "/v1/health")
        if body.get("status") != "ok":
            raise ProtocolViolation(f"/v1/health: status is {body.get('status')!r}")
        return _require_str(body, "model", "/v1/health")

    def generate(self, p: Prompt, seed: int) -> GenerationRecord:
        body = self._request(
            "POST", "/v1/generate", {"prompt": p.text, "seed": int(seed)}
        )
        image_id = _require_str(body, "image_id", "/v1/generate")
        tokens = _require_strings(body, "tokens", "/v1/generate")
        attention = _require_numbers(body, "attention", "/v1/generate")
        if len(tokens) != len(attention):
            raise ProtocolViolation(
                f"/v1/generate: {len(tokens)} tokens but {len(attention)} attention scores"
            )
        if len(tokens) != len(p.tokens):
            raise ProtocolViolation(
                f"/v1/generate: sidecar split the prompt into {len(tokens)} tokens, "
                f"caller has {len(p.tokens)}"
            )
        for score in attention:
            if score < 0:
                raise ProtocolViolation(f"/v1/generate: negative attention score {score}")
        taps = tuple(TokenAttentionPair(i, s) for i, s in enumerate(attention))
        return GenerationRecord(prompt_id=p.id, image_ref=image_id, taps=taps, seed=int(seed))

    def similarity(self, image_ref: str, text: str) -> float:
        body = self._request(
            "POST", "/v1/similarity", {"image_id": image_ref, "text": text}
        )
        score = _require(body, "score", "/v1/similarity")
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ProtocolViolation("/v1/similarity: score is not a number")
        if not math.isfinite(score) or not 0.0 <= score <= 1.0:
            raise ProtocolViolation(f"/v1/similarity: score {score} outside [0, 1]")
        return float(score)

    def suggest(self, template_kind: str, obj: str, prompt: str | None = None) -> list[str]:
        if template_kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {template_kind!r}")
        body = self._request(
            "POST",
            "/v1/suggest",
            {"template": template_kind, "object": obj, "prompt": prompt},
        )
        items = _require_strings(body, "items", "/v1/suggest")
        if any(not item for item in items):
            raise ProtocolViolation("/v1/suggest: items contain an empty string")
        return items

    def embed(self, text: str) -> list[float]:
        body = self._request("POST", "/v1/embed", {"text": text})
        vector = _require_numbers(body, "vector", "/v1/embed")
        if not vector:
            raise ProtocolViolation("/v1/embed: empty vector")
        if self._embed_dim is None:
            self._embed_dim = len(vector)
        elif len(vector) != self._embed_dim:
            raise ProtocolViolation(
                f"/v1/embed: dimension changed from {self._embed_dim} to {len(vector)}"
            )
        return vector


__all__ = [
    "ENDPOINT_ENV",
    "RemoteBackend",
    "resolve_endpoint",
]
