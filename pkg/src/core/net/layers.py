"""Building blocks of the recurrent encoder-decoder."""

import torch
import torch.nn.functional as F
from torch import nn

from src.utils.exceptions import ErrorCode, InvalidArgumentError

__all__ = ["ConvLSTMCell", "DecoderLevel", "EncoderLevel", "ResidualBlock", "apply_dynamic_filter", "he_init"]


def he_init(module: nn.Module) -> None:
    """Kaiming-normal weights and zero biases for every conv and linear layer."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.Linear)):
            nn.init.kaiming_normal_(m.weight, nonlinearity="relu")
            if m.bias is not None:
                nn.init.zeros_(m.bias)


class ConvLSTMCell(nn.Module):
    """Convolutional LSTM cell; a missing state starts from zeros."""

    def __init__(self, input_channels: int, hidden_channels: int, kernel_size: int = 3):
        super().__init__()
        self.hidden_channels = hidden_channels
        self.gates = nn.Conv2d(
            input_channels + hidden_channels, 4 * hidden_channels, kernel_size, padding=kernel_size // 2
        )

    def forward(
        self, x: torch.Tensor, state: tuple[torch.Tensor, torch.Tensor] | None
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if state is None:
            shape = (x.shape[0], self.hidden_channels, x.shape[2], x.shape[3])
            state = (x.new_zeros(shape), x.new_zeros(shape))
        hidden, cell = state
        i, f, o, g = torch.chunk(self.gates(torch.cat([x, hidden], dim=1)), 4, dim=1)
        cell = torch.sigmoid(f) * cell + torch.sigmoid(i) * torch.tanh(g)
        hidden = torch.sigmoid(o) * torch.tanh(cell)
        return hidden, cell


class EncoderLevel(nn.Module):
    """Stride-2 kernel-5 convolution followed by a kernel-3 ConvLSTM."""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        self.conv = nn.Conv2d(in_channels, out_channels, 5, stride=2, padding=2)
        self.recurrent = ConvLSTMCell(out_channels, out_channels, 3)

    def forward(
        self, x: torch.Tensor, state: tuple[torch.Tensor, torch.Tensor] | None
    ) -> tuple[torch.Tensor, tuple[torch.Tensor, torch.Tensor]]:
        hidden, cell = self.recurrent(F.relu(self.conv(x)), state)
        return hidden, (hidden, cell)


class ResidualBlock(nn.Module):
    """``f + Conv(ReLU(Conv(f)))`` with kernel 3."""

    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        return f + self.conv2(F.relu(self.conv1(f)))


def apply_dynamic_filter(x: torch.Tensor, filters: torch.Tensor) -> torch.Tensor:
    """Depthwise convolution with a separate filter bank per sample.

    Args:
        x: ``(N, C, H, W)`` features.
        filters: ``(N, C, k, k)`` per-sample depthwise kernels.
    """
    n, c, h, w = x.shape
    k = filters.shape[-1]
    out = F.conv2d(x.reshape(1, n * c, h, w), filters.reshape(n * c, 1, k, k), padding=k // 2, groups=n * c)
    return out.reshape(n, c, h, w)


class DecoderLevel(nn.Module):
    """Bilinear 2x upsample, skip concatenation and a kernel-5 convolution."""

    def __init__(self, in_channels: int, skip_channels: int, out_channels: int):
        super().__init__()
        self.out_channels = out_channels
        self.conv = nn.Conv2d(in_channels + skip_channels, out_channels, 5, padding=2)

    def forward(self, f: torch.Tensor, skip: torch.Tensor, dynamic_filter: torch.Tensor | None = None) -> torch.Tensor:
        if skip.shape[-2:] != (2 * f.shape[-2], 2 * f.shape[-1]):
            raise InvalidArgumentError(
                f"Skip spatial size {tuple(skip.shape[-2:])} is not twice {tuple(f.shape[-2:])}",
                error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
                argument="skip",
            )
        up = F.interpolate(f, scale_factor=2, mode="bilinear", align_corners=False)
        out = self.conv(torch.cat([up, skip], dim=1))
        if dynamic_filter is not None:
            out = apply_dynamic_filter(out, dynamic_filter)
        return F.relu(out)
