"""Training configuration and ablation switches."""

from __future__ import annotations

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field

from src.core.net.config import FusionMode, ModelConfig

__all__ = ["Ablation", "TrainConfig", "SeedPlan", "apply_ablation", "split_seeds"]


class Ablation(str, Enum):
    """Training variants compared by the ablation suite."""

    FULL = "full"
    DIRECT_DISTILL = "direct_distill"
    FUSE_ADD = "fuse_add"
    FUSE_MEAN = "fuse_mean"
    FUSE_XATTN = "fuse_xattn"
    PLAIN_PERCEPTUAL = "plain_perceptual"


class TrainConfig(BaseModel):
    """Sequence-training protocol.

    Attributes:
        seq_len: Recurrent steps per window; 40 reproduces the original protocol.
        batch_size: Windows per optimizer step.
        epochs: Passes over the training windows.
        learning_rate: Adam step size.
        grad_clip: Max global gradient norm.
        seed: Master seed for initialisation, data order and frame discarding.
        ablation: Variant to train.
        num_masks: Categorical masks per frame used by the semantic loss.
        reset_state_per_window: Start every window from a zero recurrent state.
        heldout_fraction: Share of sequences (last by name) held out by the ablation suite.
        checkpoint_every: Epochs between intermediate checkpoints; 0 keeps only the final one.
        perceptual_seed: Seed of the frozen perceptual extractor.
    """

    seq_len: int = Field(default=16, ge=2)
    batch_size: int = Field(default=2, ge=1)
    epochs: int = Field(default=8, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    grad_clip: float = Field(default=1.0, gt=0.0)
    seed: int = 0
    ablation: Ablation = Ablation.FULL
    num_masks: int = Field(default=10, ge=0)
    reset_state_per_window: bool = True
    heldout_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    checkpoint_every: int = Field(default=1, ge=0)
    perceptual_seed: int = 0

    @classmethod
    def full_protocol(cls, **overrides) -> TrainConfig:
        values = {"seq_len": 40, "learning_rate": 1e-5}
        values.update(overrides)
        return cls(**values)

    @property
    def uses_masks(self) -> bool:
        return self.ablation is not Ablation.PLAIN_PERCEPTUAL

    @property
    def distills_event_feature(self) -> bool:
        return self.ablation is Ablation.DIRECT_DISTILL


def apply_ablation(model_config: ModelConfig, ablation: Ablation | str) -> ModelConfig:
    """Return the model topology required by an ablation."""
    ablation = Ablation(ablation)
    if ablation is Ablation.DIRECT_DISTILL:
        return ModelConfig(**{**model_config.model_dump(), "use_cfa": False})
    fusion = {
        Ablation.FUSE_ADD: FusionMode.ADD,
        Ablation.FUSE_MEAN: FusionMode.MEAN,
        Ablation.FUSE_XATTN: FusionMode.XATTN,
    }.get(ablation, model_config.fusion)
    return ModelConfig(**{**model_config.model_dump(), "use_cfa": True, "fusion": fusion})


class SeedPlan(BaseModel):
    init: int
    data: int
    discard: int


def split_seeds(master_seed: int) -> SeedPlan:
    """Fan the master seed out into independent streams for init, data order and frame discarding."""
    init, data, discard = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master_seed).spawn(3))
    return SeedPlan(init=init, data=data, discard=discard)
