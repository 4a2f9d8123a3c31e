"""Recurrent inference over a sequence of event groups."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch

from src.core.events import EventStream, Resolution, build_voxel_grid
from src.core.net import E2VNet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Reconstruction:
    """A frame produced at the end of its event group's window."""

    time: float
    frame: np.ndarray


class Reconstructor:
    """Run a trained model group by group, carrying the recurrent state.

    Empty groups still advance the network so the output cadence follows the grouping.
    """

    def __init__(self, model: E2VNet):
        self.model = model.eval()
        self.num_bins = model.config.num_bins

    @torch.no_grad()
    def run(self, groups: Sequence[EventStream], resolution: Resolution) -> list[Reconstruction]:
        state = self.model.initial_state()
        prev: torch.Tensor | None = None
        dtype = next(self.model.parameters()).dtype
        out: list[Reconstruction] = []
        for group in groups:
            grid = build_voxel_grid(group, self.num_bins, resolution)
            voxel = torch.from_numpy(grid.data).to(dtype)[None]
            result = self.model(voxel, state, prev)
            state, prev = result.state, result.frame
            out.append(Reconstruction(time=grid.t_end, frame=result.frame[0, 0].double().numpy()))
        logger.debug(f"Reconstructed {len(out)} frames")
        return out
