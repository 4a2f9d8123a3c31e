"""Training losses."""

from .distillation import relational_distillation_loss, similarity_matrix
from .objective import LossParts, LossWeights, total_loss
from .perceptual import (
    PerceptualExtractor,
    normalize_channels,
    perceptual_loss,
    semantic_perceptual_loss,
    stage0_size,
)
from .temporal import occlusion_weight, temporal_consistency_loss, warp

__all__ = [
    "LossParts",
    "LossWeights",
    "PerceptualExtractor",
    "normalize_channels",
    "occlusion_weight",
    "perceptual_loss",
    "relational_distillation_loss",
    "semantic_perceptual_loss",
    "similarity_matrix",
    "stage0_size",
    "temporal_consistency_loss",
    "total_loss",
    "warp",
]
