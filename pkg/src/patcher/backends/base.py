"""Capability protocols every backend satisfies.

The pipeline only ever talks to these four interfaces, so a simulated
world, a remote sidecar, or a scripted test double are interchangeable.
Implementations that cannot take concurrent in-flight calls must say so
through ``serial_only``; callers then serialize access themselves.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

from ..domain import GenerationRecord, Prompt

TEMPLATE_SHAPE = "shape"
TEMPLATE_COLOR = "color"
TEMPLATE_LLM_REPAIR = "llm_repair"
TEMPLATE_COMPOSE = "compose_multiobject"

TEMPLATE_KINDS = (TEMPLATE_SHAPE, TEMPLATE_COLOR, TEMPLATE_LLM_REPAIR, TEMPLATE_COMPOSE)


@runtime_checkable
class GeneratorCapability(Protocol):
    serial_only: bool

    def generate(self, p: Prompt, seed: int) -> GenerationRecord:
        """Render an image for the prompt and report per-token attention."""
        ...


@runtime_checkable
class ScorerCapability(Protocol):
    serial_only: bool

    def similarity(self, image_ref: str, text: str) -> float:
        """Image/text agreement in [0, 1]."""
        ...


@runtime_checkable
class SuggesterCapability(Protocol):
    serial_only: bool

    def suggest(self, template_kind: str, obj: str, prompt: str | None = None) -> list[str]:
        """Ordered candidate descriptions for an object (may be empty)."""
        ...


@runtime_checkable
class EmbedderCapability(Protocol):
    serial_only: bool

    def embed(self, text: str) -> list[float]:
        """Unit-norm embedding vector for the text."""
        ...


class Backend(Protocol):
    """A full backend bundles all four capabilities on one object."""

    serial_only: bool

    def generate(self, p: Prompt, seed: int) -> GenerationRecord: ...
    def similarity(self, image_ref: str, text: str) -> float: ...
    def suggest(self, template_kind: str, obj: str, prompt: str | None = None) -> list[str]: ...
    def embed(self, text: str) -> list[float]: ...
