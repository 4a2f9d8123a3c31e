"""Voxel-grid construction with linear temporal interpolation."""

import numpy as np

from src.core.events.models import EventStream, Resolution, VoxelGrid
from src.utils.exceptions import InvalidArgumentError

__all__ = ["build_voxel_grid", "stack_voxel_grids"]


def build_voxel_grid(
    group: EventStream,
    num_bins: int,
    resolution: Resolution | None = None,
) -> VoxelGrid:
    """Accumulate an event group into a ``(B, H, W)`` grid.

    Timestamps are mapped affinely from the group window onto ``[0, B-1]``;
    each polarity is split between bins ``floor(tau)`` and ``ceil(tau)`` with
    weights ``1 - frac(tau)`` and ``frac(tau)``. A zero-length window maps every
    event to ``tau = 0``.

    Raises:
        InvalidArgumentError: If ``num_bins < 1``.
    """
    if num_bins < 1:
        raise InvalidArgumentError(f"num_bins must be >= 1, got {num_bins}", argument="num_bins")
    width, height = resolution if resolution is not None else group.resolution
    t_start, t_end = group.window
    grid = np.zeros(num_bins * height * width, dtype=np.float64)

    if len(group):
        span = t_end - t_start
        if span > 0:
            tau = (num_bins - 1) * (group.t - t_start) / span
        else:
            tau = np.zeros_like(group.t)
        tau = np.clip(tau, 0.0, num_bins - 1)

        left = np.floor(tau).astype(np.int64)
        frac = tau - left
        right = np.minimum(left + 1, num_bins - 1)
        pol = group.p.astype(np.float64)
        pixel = group.y * width + group.x

        np.add.at(grid, left * height * width + pixel, pol * (1.0 - frac))
        np.add.at(grid, right * height * width + pixel, pol * frac)

    return VoxelGrid(data=grid.reshape(num_bins, height, width), t_start=t_start, t_end=t_end)


def stack_voxel_grids(grids: list[VoxelGrid]) -> np.ndarray:
    """Stack grids into a float32 ``(T, B, H, W)`` array for the network."""
    return np.stack([g.data for g in grids]).astype(np.float32)
