"""Reference model sidecar for the patcher v1 wire protocol."""

from .app import ModelServerApp
from .config import ServerConfig
from .engine import ModelEngine, SimulatorEngine, UnknownImage, UpstreamFailure
from .serving import make_http_server, start_background

__version__ = "0.1.0"

__all__ = [
    "ModelEngine",
    "ModelServerApp",
    "ServerConfig",
    "SimulatorEngine",
    "UnknownImage",
    "UpstreamFailure",
    "make_http_server",
    "start_background",
]
