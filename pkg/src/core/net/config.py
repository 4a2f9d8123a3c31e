"""Architecture hyperparameters of the reconstruction network."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from src.core.semantics.fusion import FusionMode

__all__ = ["FusionMode", "ModelConfig"]


class ModelConfig(BaseModel):
    """Network topology.

    Encoder level ``i`` outputs ``base_channels * 2**(i + 1)`` channels, except
    the last level which outputs ``bottleneck_channels`` (the event feature
    ``F_e``) at ``1 / 2**num_encoders`` of the input resolution.

    Attributes:
        base_channels: Channels of the full-resolution head.
        num_encoders: Stride-2 encoder levels.
        num_residual_blocks: Residual blocks at the bottleneck.
        num_bins: Temporal bins of the voxel grid input.
        use_cfhm: Generate dynamic decoder filters from the input context.
        bottleneck_channels: Channels of ``F_e``.
        cfhm_kernel: Spatial size of the dynamic filters.
        use_cfa: Enable the semantic branch (alignment plus fusion).
        fusion: Fusion strategy used when ``use_cfa`` is set.
        detach_cfa_input: Stop distillation gradients at the alignment input.
        attention_heads: Heads of the cross-attention fusion.
    """

    base_channels: int = Field(default=16, ge=1)
    num_encoders: int = Field(default=2, ge=1)
    num_residual_blocks: int = Field(default=2, ge=0)
    num_bins: int = Field(default=5, ge=1)
    use_cfhm: bool = True
    bottleneck_channels: int = Field(default=64, ge=1)
    cfhm_kernel: int = Field(default=3, ge=1)
    use_cfa: bool = True
    fusion: FusionMode = FusionMode.SFF
    detach_cfa_input: bool = False
    attention_heads: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def check_layout(self) -> ModelConfig:
        if self.cfhm_kernel % 2 == 0:
            raise ValueError("cfhm_kernel must be odd")
        if self.fusion is FusionMode.XATTN and self.bottleneck_channels % self.attention_heads:
            raise ValueError("bottleneck_channels must be divisible by attention_heads")
        return self

    @classmethod
    def full_scale(cls, **overrides) -> ModelConfig:
        """One encoder level feeding a 256-channel event feature at half resolution."""
        values = {"base_channels": 32, "num_encoders": 1, "bottleneck_channels": 256}
        values.update(overrides)
        return cls(**values)

    def encoder_channels(self) -> list[int]:
        channels = [self.base_channels * 2 ** (i + 1) for i in range(self.num_encoders)]
        channels[-1] = self.bottleneck_channels
        return channels

    def skip_channels(self) -> list[int]:
        """Channels of the skip tensors, full resolution first."""
        return [self.base_channels, *self.encoder_channels()[:-1]]

    @property
    def downsample_factor(self) -> int:
        return 2**self.num_encoders

    def feature_shape(self, resolution: tuple[int, int]) -> tuple[int, int, int]:
        """``(C, H, W)`` of ``F_e`` for a ``(width, height)`` input."""
        width, height = resolution
        return self.bottleneck_channels, height // self.downsample_factor, width // self.downsample_factor
