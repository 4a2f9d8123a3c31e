"""Combined training objective."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from pydantic import BaseModel, Field

__all__ = ["LossParts", "LossWeights", "total_loss"]


class LossWeights(BaseModel):
    """``lambda_distill`` scales the distillation term; ``alpha`` sharpens the occlusion weight."""

    lambda_distill: float = Field(default=1.8, ge=0.0)
    alpha: float = Field(default=50.0, gt=0.0)


@dataclass
class LossParts:
    """Per-term losses of one step; ``temporal`` is ``None`` on the first step of a window."""

    semantic: torch.Tensor
    distill: torch.Tensor
    temporal: torch.Tensor | None = None

    def as_floats(self) -> dict[str, float]:
        return {
            "semantic": float(self.semantic.detach()),
            "temporal": 0.0 if self.temporal is None else float(self.temporal.detach()),
            "distill": float(self.distill.detach()),
        }


def total_loss(parts: LossParts, weights: LossWeights) -> torch.Tensor:
    """``semantic + temporal + lambda * distill``."""
    total = parts.semantic + weights.lambda_distill * parts.distill
    if parts.temporal is not None:
        total = total + parts.temporal
    return total
