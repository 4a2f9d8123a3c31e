"""Recurrent encoder-decoder network."""

from .checkpoint import CHECKPOINT_FORMAT, load_checkpoint, save_checkpoint
from .config import FusionMode, ModelConfig
from .model import E2VNet, ModelOutput, RecurrentState

__all__ = [
    "CHECKPOINT_FORMAT",
    "E2VNet",
    "FusionMode",
    "ModelConfig",
    "ModelOutput",
    "RecurrentState",
    "load_checkpoint",
    "save_checkpoint",
]
