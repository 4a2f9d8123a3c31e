"""Fusion of aligned semantic features into event features.

``SemanticFeatureFusion`` is the attention-gated residual fusion used by the
full model; the additive, mean and cross-attention variants exist for
ablations.
"""

import logging
from enum import Enum

import torch
import torch.nn.functional as F
from torch import nn

from src.utils.exceptions import ErrorCode, InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = [
    "AdditiveFusion",
    "CrossAttentionFusion",
    "FusionMode",
    "MeanFusion",
    "SemanticFeatureFusion",
    "adaptive_fusion",
    "build_fusion",
]


class FusionMode(str, Enum):
    """How aligned semantic features are merged into the event features."""

    SFF = "sff"
    ADD = "add"
    MEAN = "mean"
    XATTN = "xattn"


def _check_shapes(f_semantic: torch.Tensor, f_e: torch.Tensor) -> None:
    if f_semantic.shape != f_e.shape:
        raise InvalidArgumentError(
            f"Semantic feature {tuple(f_semantic.shape)} does not match event feature {tuple(f_e.shape)}",
            error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
            argument="f_semantic",
        )


def adaptive_fusion(
    f_e: torch.Tensor, f_semantic: torch.Tensor, attention: torch.Tensor, gate: torch.Tensor
) -> torch.Tensor:
    """``F_e' = f_e + g * A * f_semantic``."""
    return f_e + gate * attention * f_semantic


class _BatchOrInstanceNorm(nn.BatchNorm2d):
    """BatchNorm that normalises a single-sample batch per instance, in training and in eval.

    Training on single samples still folds the instance statistics into the
    running buffers, so larger eval batches see trained statistics.
    """

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[0] != 1:
            return super().forward(x)
        if not self.training:
            return F.instance_norm(x, weight=self.weight, bias=self.bias, eps=self.eps)
        self.num_batches_tracked.add_(1)
        return F.instance_norm(
            x,
            running_mean=self.running_mean,
            running_var=self.running_var,
            weight=self.weight,
            bias=self.bias,
            use_input_stats=True,
            momentum=self.momentum if self.momentum is not None else 0.1,
            eps=self.eps,
        )


class SemanticFeatureFusion(nn.Module):
    """Spatial attention with a global channel gate.

    The attention map comes from ``concat(f_semantic, f_e)`` through
    ``Conv -> BatchNorm -> GELU``; the gate comes from globally pooled
    ``f_e`` through a 1x1 conv and a sigmoid.
    """

    def __init__(self, channels: int):
        super().__init__()
        self.attention_conv = nn.Conv2d(2 * channels, channels, 3, padding=1)
        self.attention_norm = _BatchOrInstanceNorm(channels)
        self.gate_conv = nn.Conv2d(channels, channels, 1)

    def attention(self, f_semantic: torch.Tensor, f_e: torch.Tensor) -> torch.Tensor:
        return F.gelu(self.attention_norm(self.attention_conv(torch.cat([f_semantic, f_e], dim=1))))

    def gate(self, f_e: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.gate_conv(F.adaptive_avg_pool2d(f_e, 1)))

    def forward(self, f_semantic: torch.Tensor, f_e: torch.Tensor) -> torch.Tensor:
        _check_shapes(f_semantic, f_e)
        return adaptive_fusion(f_e, f_semantic, self.attention(f_semantic, f_e), self.gate(f_e))


class AdditiveFusion(nn.Module):
    def forward(self, f_semantic: torch.Tensor, f_e: torch.Tensor) -> torch.Tensor:
        _check_shapes(f_semantic, f_e)
        return f_e + f_semantic


class MeanFusion(nn.Module):
    def forward(self, f_semantic: torch.Tensor, f_e: torch.Tensor) -> torch.Tensor:
        _check_shapes(f_semantic, f_e)
        return 0.5 * (f_e + f_semantic)


class CrossAttentionFusion(nn.Module):
    """Multi-head attention over spatial tokens; queries from ``f_e``, keys and values from ``f_semantic``."""

    def __init__(self, channels: int, heads: int = 4):
        super().__init__()
        self.attn = nn.MultiheadAttention(channels, heads, batch_first=True)

    def forward(self, f_semantic: torch.Tensor, f_e: torch.Tensor) -> torch.Tensor:
        _check_shapes(f_semantic, f_e)
        n, c, h, w = f_e.shape
        query = f_e.flatten(2).transpose(1, 2)
        memory = f_semantic.flatten(2).transpose(1, 2)
        fused, _ = self.attn(query, memory, memory, need_weights=False)
        return f_e + fused.transpose(1, 2).reshape(n, c, h, w)


def build_fusion(mode: FusionMode | str, channels: int, heads: int = 4) -> nn.Module:
    """Instantiate a fusion module by name.

    Raises:
        InvalidArgumentError: If the mode is unknown.
    """
    try:
        kind = FusionMode(mode)
    except ValueError as e:
        raise InvalidArgumentError(f"Unknown fusion mode: {mode}", argument="fusion") from e
    logger.debug(f"Building {kind.value} fusion for {channels} channels")
    if kind is FusionMode.SFF:
        return SemanticFeatureFusion(channels)
    if kind is FusionMode.ADD:
        return AdditiveFusion()
    if kind is FusionMode.MEAN:
        return MeanFusion()
    return CrossAttentionFusion(channels, heads)
