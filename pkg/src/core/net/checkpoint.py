"""Checkpoint container ``E2VCKPT/1``: format tag, model config, parameters and run metadata."""

import logging
from pathlib import Path
from typing import Any

import torch

from src.core.net.config import ModelConfig
from src.core.net.model import E2VNet
from src.utils.exceptions import CheckpointError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "E2VCKPT/1"


def save_checkpoint(model: E2VNet, path: Path, metadata: dict[str, Any] | None = None) -> Path:
    """Write ``model`` with its config and ``metadata`` (epoch, step, seed, ablation...)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "config": model.config.model_dump(mode="json"),
        "state_dict": {k: v.detach().cpu() for k, v in model.state_dict().items()},
        "metadata": dict(metadata or {}),
    }
    torch.save(payload, path)
    logger.debug(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Path, map_location: str = "cpu") -> tuple[E2VNet, dict[str, Any]]:
    """Rebuild the network stored at ``path``.

    Returns:
        ``(model, metadata)`` with the model in eval mode.

    Raises:
        CheckpointError: If the file is unreadable, has another format tag or
            its parameters do not fit the stored config.
    """
    path = Path(path)
    try:
        payload = torch.load(path, map_location=map_location, weights_only=True)
    except FileNotFoundError as e:
        raise CheckpointError(f"Checkpoint not found: {path}", path=str(path)) from e
    except Exception as e:
        raise CheckpointError(f"Unreadable checkpoint: {e}", path=str(path)) from e

    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        found = payload.get("format") if isinstance(payload, dict) else type(payload).__name__
        raise CheckpointError(
            f"Unsupported checkpoint format {found!r}, expected {CHECKPOINT_FORMAT}",
            path=str(path),
        )
    try:
        model = E2VNet(ModelConfig(**payload["config"]))
        model.load_state_dict(payload["state_dict"])
    except (KeyError, TypeError, ValueError, RuntimeError) as e:
        raise CheckpointError(f"Checkpoint does not match its config: {e}", path=str(path)) from e
    model.eval()
    return model, dict(payload.get("metadata", {}))
