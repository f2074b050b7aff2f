"""Server configuration.

The sidecar is model-agnostic: the config names the checkpoint to load,
the device to run it on, where generated image records are stored, and
the credential for the upstream suggestion endpoint. The bundled engine
is hermetic and ignores the device and credential, but both travel
through the config so a real engine drops in without touching the app.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

DEFAULT_MODEL_ID = "sim-diffusion-v1"

# reported by /v1/health so every experiment records how the per-word
# attention scores were read out of the model
DEFAULT_ATTENTION_READOUT = "per-word shares, mean over steps, sum over heads"


@dataclass(frozen=True)
class ServerConfig:
    model_id: str = DEFAULT_MODEL_ID
    device: str = "cpu"
    image_store: Path | None = None
    llm_token: str | None = None
    # generation requests admitted at once: one in flight, the rest
    # queued; anything beyond this is answered 429
    max_pending: int = 4
    attention_readout: str = DEFAULT_ATTENTION_READOUT

    def __post_init__(self) -> None:
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if self.max_pending < 1:
            raise ValueError("max_pending must be positive")


__all__ = [
    "DEFAULT_ATTENTION_READOUT",
    "DEFAULT_MODEL_ID",
    "ServerConfig",
]
