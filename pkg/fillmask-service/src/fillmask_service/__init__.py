"""HTTP sidecar serving fill-mask and next-word probabilities for one model."""

from .app import create_app
from .config import ServiceConfig
from .model import CAUSAL, MASKED, BadRequest, ClozeModel, ModelLoadError

__all__ = [
    "BadRequest",
    "CAUSAL",
    "ClozeModel",
    "MASKED",
    "ModelLoadError",
    "ServiceConfig",
    "create_app",
]
