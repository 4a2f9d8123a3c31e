"""Cross-modal feature alignment (CFA)."""

import torch
from torch import nn

__all__ = ["CrossModalAlignment"]


class CrossModalAlignment(nn.Module):
    """Map event features into the teacher feature space.

    ``Conv -> GELU -> Conv -> GELU -> InstanceNorm``; the output keeps the
    input shape, which is also the teacher feature shape.

    Args:
        channels: Channels of ``F_e`` and of the teacher feature.
        eps: Instance-norm stabiliser for zero-variance channels.
    """

    def __init__(self, channels: int, eps: float = 1e-5):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(channels, channels, 3, padding=1),
            nn.GELU(),
            nn.Conv2d(channels, channels, 3, padding=1),
            nn.GELU(),
            nn.InstanceNorm2d(channels, affine=False, eps=eps),
        )

    def forward(self, f_e: torch.Tensor) -> torch.Tensor:
        return self.body(f_e)
