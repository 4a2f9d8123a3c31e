"""Frozen feature extractor and the (semantic) perceptual losses.

Features of each stage are unit-normalised along channels; a stage distance
is the spatial mean of the channel-summed squared difference. The semantic
variant multiplies the first stage by the union of the categorical masks.
"""

import math
from collections.abc import Sequence

import torch
import torch.nn.functional as F
from torch import nn

from src.utils.exceptions import ErrorCode, InvalidArgumentError

__all__ = [
    "PerceptualExtractor",
    "normalize_channels",
    "perceptual_loss",
    "semantic_perceptual_loss",
    "stage0_size",
]

DEFAULT_WIDTHS = (8, 16, 32)
_NORM_EPS = 1e-10


def stage0_size(height: int, width: int) -> tuple[int, int]:
    """Spatial size of the first stage, which is also the mask size."""
    return math.ceil(height / 2), math.ceil(width / 2)


def normalize_channels(f: torch.Tensor) -> torch.Tensor:
    return f / torch.sqrt((f * f).sum(dim=1, keepdim=True) + _NORM_EPS)


class PerceptualExtractor(nn.Module):
    """Frozen stack of stride-2 kernel-3 convolutions with ReLU, seeded at construction.

    Args:
        widths: Output channels per stage.
        seed: Seed of the random weights.
        normalize: Unit-normalise stage outputs along channels.
    """

    def __init__(self, widths: Sequence[int] = DEFAULT_WIDTHS, seed: int = 0, normalize: bool = True):
        super().__init__()
        self.normalize = normalize
        generator = torch.Generator().manual_seed(seed)
        ins = [1, *widths[:-1]]
        self.stages = nn.ModuleList()
        for c_in, c_out in zip(ins, widths, strict=True):
            conv = nn.Conv2d(c_in, c_out, 3, stride=2, padding=1, bias=False)
            with torch.no_grad():
                conv.weight.copy_(torch.randn(conv.weight.shape, generator=generator) * math.sqrt(2.0 / (c_in * 9)))
            self.stages.append(conv)
        self.requires_grad_(False)

    @classmethod
    def from_weights(cls, weights: Sequence[torch.Tensor], normalize: bool = False) -> "PerceptualExtractor":
        """Build an extractor with explicit ``(C_out, C_in, 3, 3)`` kernels."""
        extractor = cls(widths=[w.shape[0] for w in weights], normalize=normalize)
        with torch.no_grad():
            for stage, weight in zip(extractor.stages, weights, strict=True):
                stage.weight.copy_(weight)
        return extractor

    def train(self, mode: bool = True) -> "PerceptualExtractor":
        # always frozen
        return super().train(False)

    def forward(self, image: torch.Tensor) -> list[torch.Tensor]:
        feats = []
        x = image
        for stage in self.stages:
            x = F.relu(stage(x.to(stage.weight.dtype)))
            feats.append(normalize_channels(x) if self.normalize else x)
        return feats


def _stage_distance(a: torch.Tensor, b: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    diff = a - b
    if mask is not None:
        diff = mask * diff
    return (diff * diff).sum(dim=1).mean()


def _as_image(x: torch.Tensor) -> torch.Tensor:
    if x.ndim == 2:
        return x[None, None]
    if x.ndim == 3:
        return x[:, None]
    return x


def perceptual_loss(rec: torch.Tensor, gt: torch.Tensor, extractor: PerceptualExtractor) -> torch.Tensor:
    """Unmasked distance summed over all stages."""
    rec, gt = _as_image(rec), _as_image(gt)
    if rec.shape != gt.shape:
        raise InvalidArgumentError(
            f"Image shapes differ: {tuple(rec.shape)} vs {tuple(gt.shape)}",
            error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
            argument="gt",
        )
    return sum(_stage_distance(a, b) for a, b in zip(extractor(rec), extractor(gt), strict=True))


def semantic_perceptual_loss(
    rec: torch.Tensor,
    gt: torch.Tensor,
    masks: torch.Tensor | None,
    extractor: PerceptualExtractor,
) -> torch.Tensor:
    """Perceptual loss with the first stage restricted to semantic pixels.

    Args:
        rec: Reconstruction ``(N, 1, H, W)``.
        gt: Ground truth, same shape.
        masks: ``(N, K, hm, wm)`` or ``(K, hm, wm)`` binary masks; their union
            multiplies the first stage. ``None`` gives :func:`perceptual_loss`.
        extractor: Frozen feature extractor.

    Raises:
        InvalidArgumentError: If the mask size differs from the first stage size.
    """
    if masks is None:
        return perceptual_loss(rec, gt, extractor)
    rec, gt = _as_image(rec), _as_image(gt)
    if rec.shape != gt.shape:
        raise InvalidArgumentError(
            f"Image shapes differ: {tuple(rec.shape)} vs {tuple(gt.shape)}",
            error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
            argument="gt",
        )
    if masks.ndim == 3:
        masks = masks[None]
    feats_rec, feats_gt = extractor(rec), extractor(gt)
    if tuple(masks.shape[-2:]) != tuple(feats_rec[0].shape[-2:]):
        raise InvalidArgumentError(
            f"Mask size {tuple(masks.shape[-2:])} does not match first stage {tuple(feats_rec[0].shape[-2:])}",
            error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
            argument="masks",
        )
    union = (masks > 0).any(dim=1, keepdim=True).to(feats_rec[0].dtype)
    loss = _stage_distance(feats_rec[0], feats_gt[0], union)
    for a, b in zip(feats_rec[1:], feats_gt[1:], strict=True):
        loss = loss + _stage_distance(a, b)
    return loss
