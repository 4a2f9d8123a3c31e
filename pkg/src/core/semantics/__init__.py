"""Semantic branch: feature alignment, fusion and teacher supervision."""

from .alignment import CrossModalAlignment
from .fusion import (
    AdditiveFusion,
    CrossAttentionFusion,
    FusionMode,
    MeanFusion,
    SemanticFeatureFusion,
    adaptive_fusion,
    build_fusion,
)

__all__ = [
    "AdditiveFusion",
    "CrossAttentionFusion",
    "CrossModalAlignment",
    "FusionMode",
    "MeanFusion",
    "SemanticFeatureFusion",
    "adaptive_fusion",
    "build_fusion",
]
