"""Image-generation backends: capability protocols, the deterministic
in-process simulator, and the HTTP client for a model sidecar."""

from .base import (
    Backend,
    EmbedderCapability,
    GeneratorCapability,
    ScorerCapability,
    SuggesterCapability,
    TEMPLATE_COLOR,
    TEMPLATE_COMPOSE,
    TEMPLATE_LLM_REPAIR,
    TEMPLATE_SHAPE,
)
from .simulator import SimWorld, SimulatorBackend, default_world
from .remote import RemoteBackend

__all__ = [
    "Backend",
    "EmbedderCapability",
    "GeneratorCapability",
    "ScorerCapability",
    "SuggesterCapability",
    "TEMPLATE_COLOR",
    "TEMPLATE_COMPOSE",
    "TEMPLATE_LLM_REPAIR",
    "TEMPLATE_SHAPE",
    "SimWorld",
    "SimulatorBackend",
    "default_world",
    "RemoteBackend",
]
