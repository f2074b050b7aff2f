"""Model engines: the part of the sidecar that actually renders.

An engine owns the model and the image store index; the app layer owns
HTTP, validation, and backpressure. The bundled SimulatorEngine wraps
the hermetic simulated world from the patcher package, so the sidecar
runs everywhere; a real diffusion engine implements the same four
methods and plugs into the same app.

Engines signal problems with typed exceptions so the app can map them
to status codes: UnknownImage -> 404, UpstreamFailure -> 502,
ValueError -> 400.
"""

from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass, field
from typing import Protocol

from patcher.backends.simulator import SimulatorBackend, SimWorld
from patcher.domain import Prompt


class UnknownImage(Exception):
    """similarity() was asked about an image_id nobody generated."""


class UpstreamFailure(Exception):
    """The suggestion upstream misbehaved; surfaces as 502."""


@dataclass(frozen=True)
class GeneratedImage:
    """One finished generation: wire fields plus the storable record."""

    image_id: str
    tokens: tuple[str, ...]
    attention: tuple[float, ...]
    record: dict = field(compare=False)


class ModelEngine(Protocol):
    model_id: str

    def generate(self, prompt: str, seed: int) -> GeneratedImage: ...
    def similarity(self, image_id: str, text: str) -> float: ...
    def suggest(self, template: str, obj: str, prompt: str | None) -> list[str]: ...
    def embed(self, text: str) -> list[float]: ...


def content_image_id(model_id: str, prompt: str, seed: int) -> str:
    """Deterministic image key: same model, prompt, and seed, same id."""
    digest = hashlib.sha256(f"{model_id}\n{prompt}\n{seed}".encode("utf-8"))
    return digest.hexdigest()


def unit_norm(vector: list[float]) -> list[float]:
    norm = math.sqrt(sum(x * x for x in vector))
    if norm == 0.0:
        return list(vector)
    return [x / norm for x in vector]


class SimulatorEngine:
    """Hermetic engine backed by the simulated world.

    Prompts are split at whitespace, exactly like the client, so the
    token count always agrees; attention comes back one score per word.
    Image ids are content hashes, and the index from id to the world's
    internal image reference is kept here so similarity lookups work
    across repeated generations.
    """

    def __init__(self, world: SimWorld | None = None, model_id: str = "sim-diffusion-v1"):
        self.model_id = model_id
        self._backend = SimulatorBackend(world)
        self._refs: dict[str, str] = {}
        self._lock = threading.Lock()

    def generate(self, prompt: str, seed: int) -> GeneratedImage:
        p = Prompt.from_text("sidecar", prompt)
        result = self._backend.generate(p, seed)
        scores = [0.0] * len(p.tokens)
        for tap in result.taps:
            scores[tap.token_index] = tap.score
        image_id = content_image_id(self.model_id, p.text, seed)
        with self._lock:
            self._refs[image_id] = result.image_ref
        record = {
            "prompt": p.text,
            "seed": seed,
            "model": self.model_id,
            "present": sorted(self._backend.present_set(result.image_ref)),
        }
        return GeneratedImage(
            image_id=image_id,
            tokens=tuple(t.surface for t in p.tokens),
            attention=tuple(scores),
            record=record,
        )

    def similarity(self, image_id: str, text: str) -> float:
        with self._lock:
            ref = self._refs.get(image_id)
        if ref is None:
            raise UnknownImage(image_id)
        score = self._backend.similarity(ref, text)
        return min(1.0, max(0.0, score))

    def suggest(self, template: str, obj: str, prompt: str | None) -> list[str]:
        return self._backend.suggest(template, obj, prompt)

    def embed(self, text: str) -> list[float]:
        return unit_norm(self._backend.embed(text))


__all__ = [
    "GeneratedImage",
    "ModelEngine",
    "SimulatorEngine",
    "UnknownImage",
    "UpstreamFailure",
    "content_image_id",
    "unit_norm",
]
