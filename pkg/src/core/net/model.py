"""Recurrent encoder-decoder with an optional semantic branch.

Data flow for one voxel grid ``V_k``::

    V_k -> head -> encoder levels (stride-2 conv + ConvLSTM) -> F_e
    F_e -> CFA -> F_semantic;  fusion(F_semantic, F_e) -> F_e'
    F_e' -> residual blocks -> decoder levels (+ skips, CFHM filters) -> sigmoid head
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

from src.core.net.cfhm import ContextFusionHypernet
from src.core.net.config import ModelConfig
from src.core.net.layers import DecoderLevel, EncoderLevel, ResidualBlock, he_init
from src.core.semantics.alignment import CrossModalAlignment
from src.core.semantics.fusion import build_fusion
from src.utils.exceptions import ErrorCode, InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = ["E2VNet", "ModelOutput", "RecurrentState"]

LevelState = tuple[torch.Tensor, torch.Tensor] | None


@dataclass
class RecurrentState:
    """Hidden and cell maps per encoder level; ``None`` entries mean zeros."""

    levels: list[LevelState] = field(default_factory=list)

    @classmethod
    def empty(cls, num_levels: int) -> RecurrentState:
        return cls(levels=[None] * num_levels)

    def detach(self) -> RecurrentState:
        return RecurrentState(
            levels=[None if s is None else (s[0].detach(), s[1].detach()) for s in self.levels]
        )

    @property
    def is_empty(self) -> bool:
        return all(s is None for s in self.levels)


@dataclass
class ModelOutput:
    """Outputs of one recurrent step.

    Attributes:
        frame: ``(N, 1, H, W)`` reconstruction in ``(0, 1)``.
        state: Updated recurrent state.
        f_e: Event feature at the bottleneck.
        f_semantic: Aligned feature, ``None`` without the semantic branch.
        f_fused: Feature handed to the residual blocks.
    """

    frame: torch.Tensor
    state: RecurrentState
    f_e: torch.Tensor
    f_semantic: torch.Tensor | None
    f_fused: torch.Tensor


class E2VNet(nn.Module):
    """Event-to-video reconstruction network."""

    def __init__(self, config: ModelConfig | None = None):
        super().__init__()
        self.config = config or ModelConfig()
        cfg = self.config
        enc_channels = cfg.encoder_channels()
        skip_channels = cfg.skip_channels()

        self.head = nn.Conv2d(cfg.num_bins, cfg.base_channels, 5, padding=2)
        ins = [cfg.base_channels, *enc_channels[:-1]]
        self.encoders = nn.ModuleList(EncoderLevel(i, o) for i, o in zip(ins, enc_channels, strict=True))
        self.residuals = nn.Sequential(*(ResidualBlock(cfg.bottleneck_channels) for _ in range(cfg.num_residual_blocks)))

        self.alignment: CrossModalAlignment | None = None
        self.fusion: nn.Module | None = None
        if cfg.use_cfa:
            self.alignment = CrossModalAlignment(cfg.bottleneck_channels)
            self.fusion = build_fusion(cfg.fusion, cfg.bottleneck_channels, cfg.attention_heads)

        decoders = []
        in_channels = cfg.bottleneck_channels
        for level in reversed(range(cfg.num_encoders)):
            decoders.append(DecoderLevel(in_channels, skip_channels[level], skip_channels[level]))
            in_channels = skip_channels[level]
        self.decoders = nn.ModuleList(decoders)

        self.cfhm: ContextFusionHypernet | None = None
        if cfg.use_cfhm:
            self.cfhm = ContextFusionHypernet(cfg.num_bins, [d.out_channels for d in self.decoders], cfg.cfhm_kernel)
        self.prediction = nn.Conv2d(cfg.base_channels, 1, 1)

        he_init(self)
        logger.debug(f"Built E2VNet with {sum(p.numel() for p in self.parameters())} parameters")

    def initial_state(self) -> RecurrentState:
        return RecurrentState.empty(self.config.num_encoders)

    def _check_input(self, voxel: torch.Tensor) -> None:
        if voxel.ndim != 4 or voxel.shape[1] != self.config.num_bins:
            raise InvalidArgumentError(
                f"Expected (N, {self.config.num_bins}, H, W) voxels, got {tuple(voxel.shape)}",
                error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
                argument="voxel",
            )
        factor = self.config.downsample_factor
        if voxel.shape[2] % factor or voxel.shape[3] % factor:
            raise InvalidArgumentError(
                f"Spatial size {tuple(voxel.shape[2:])} is not divisible by {factor}",
                error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
                argument="voxel",
            )

    def encoder_forward(
        self, voxel: torch.Tensor, state: RecurrentState | None = None
    ) -> tuple[torch.Tensor, list[torch.Tensor], RecurrentState]:
        """Run the head and encoder levels.

        Returns:
            ``(F_e, skips, new_state)`` with skips ordered full resolution first.

        Raises:
            InvalidArgumentError: On a bin-count mismatch or spatial dims not
                divisible by ``2**num_encoders``.
        """
        self._check_input(voxel)
        state = state or self.initial_state()
        x = F.relu(self.head(voxel))
        skips = [x]
        levels: list[LevelState] = []
        for encoder, level_state in zip(self.encoders, state.levels, strict=True):
            x, new_state = encoder(x, level_state)
            skips.append(x)
            levels.append(new_state)
        return x, skips[:-1], RecurrentState(levels=levels)

    def residual_forward(self, f: torch.Tensor) -> torch.Tensor:
        return self.residuals(f)

    def cfhm_generate(self, voxel: torch.Tensor, prev_frame: torch.Tensor | None = None) -> list[torch.Tensor] | None:
        """Dynamic filter banks for each decoder level, or ``None`` when CFHM is off."""
        if self.cfhm is None:
            return None
        if prev_frame is None:
            prev_frame = voxel.new_zeros(voxel.shape[0], 1, voxel.shape[2], voxel.shape[3])
        return self.cfhm(voxel, prev_frame.detach())

    def semantic_branch(self, f_e: torch.Tensor) -> tuple[torch.Tensor | None, torch.Tensor]:
        """Return ``(F_semantic, F_e')``; without the branch ``F_e'`` is ``F_e``."""
        if self.alignment is None or self.fusion is None:
            return None, f_e
        aligned_input = f_e.detach() if self.config.detach_cfa_input else f_e
        f_semantic = self.alignment(aligned_input)
        return f_semantic, self.fusion(f_semantic, f_e)

    def decoder_forward(
        self, level: int, f: torch.Tensor, skip: torch.Tensor, dynamic_filter: torch.Tensor | None = None
    ) -> torch.Tensor:
        """Apply decoder ``level`` (0 is the deepest)."""
        return self.decoders[level](f, skip, dynamic_filter)

    def reconstruct_frame(
        self,
        f_e_prime: torch.Tensor,
        skips: list[torch.Tensor],
        cfhm_weights: list[torch.Tensor] | None = None,
    ) -> torch.Tensor:
        """Decode a bottleneck feature into a ``(N, 1, H, W)`` frame in ``(0, 1)``."""
        x = f_e_prime
        for level, skip in enumerate(reversed(skips)):
            bank = cfhm_weights[level] if cfhm_weights is not None else None
            x = self.decoder_forward(level, x, skip, bank)
        return torch.sigmoid(self.prediction(x))

    def forward(
        self,
        voxel: torch.Tensor,
        state: RecurrentState | None = None,
        prev_frame: torch.Tensor | None = None,
    ) -> ModelOutput:
        f_e, skips, new_state = self.encoder_forward(voxel, state)
        f_semantic, f_fused = self.semantic_branch(f_e)
        bottleneck = self.residual_forward(f_fused)
        frame = self.reconstruct_frame(bottleneck, skips, self.cfhm_generate(voxel, prev_frame))
        return ModelOutput(frame=frame, state=new_state, f_e=f_e, f_semantic=f_semantic, f_fused=f_fused)
