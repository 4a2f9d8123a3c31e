"""Context fusion hypernetwork.

Maps the current voxel grid concatenated with the previous reconstruction to
one depthwise filter bank per decoder level. Each bank is an identity kernel
plus a bounded learned correction, so an untrained generator leaves the
decoder close to its static path.
"""

import torch
import torch.nn.functional as F
from torch import nn

__all__ = ["ContextFusionHypernet", "identity_filters"]

_HIDDEN = 16
_DELTA_SCALE = 0.1


def identity_filters(batch: int, channels: int, kernel: int, like: torch.Tensor) -> torch.Tensor:
    """``(batch, channels, k, k)`` bank of centred delta kernels."""
    bank = like.new_zeros(batch, channels, kernel, kernel)
    bank[:, :, kernel // 2, kernel // 2] = 1.0
    return bank


class ContextFusionHypernet(nn.Module):
    """Per-sample dynamic filter generator.

    Args:
        num_bins: Voxel bins of the input.
        level_channels: Output channels of each decoder level, in decoding order.
        kernel: Spatial size of the generated kernels.
    """

    def __init__(self, num_bins: int, level_channels: list[int], kernel: int = 3):
        super().__init__()
        self.kernel = kernel
        self.level_channels = list(level_channels)
        self.context = nn.Sequential(
            nn.Conv2d(num_bins + 1, _HIDDEN, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(_HIDDEN, _HIDDEN, 3, stride=2, padding=1),
            nn.ReLU(),
        )
        self.head = nn.Linear(_HIDDEN, sum(c * kernel * kernel for c in self.level_channels))

    @property
    def filter_shapes(self) -> list[tuple[int, int, int]]:
        """Per-sample filter shape ``(C, k, k)`` of each decoder level."""
        return [(c, self.kernel, self.kernel) for c in self.level_channels]

    def forward(self, voxel: torch.Tensor, prev_frame: torch.Tensor) -> list[torch.Tensor]:
        context = self.context(torch.cat([voxel, prev_frame], dim=1))
        raw = self.head(F.adaptive_avg_pool2d(context, 1).flatten(1))
        batch = voxel.shape[0]
        banks = []
        offset = 0
        for channels, k, _ in self.filter_shapes:
            size = channels * k * k
            delta = torch.tanh(raw[:, offset : offset + size]).reshape(batch, channels, k, k)
            banks.append(identity_filters(batch, channels, k, raw) + _DELTA_SCALE * delta)
            offset += size
        return banks
