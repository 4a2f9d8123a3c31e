"""Event data model, grouping strategies and voxel grids."""

from .grouping import (
    GroupingStrategy,
    group_between_frames,
    group_events,
    group_fixed_count,
    group_fixed_duration,
    surviving_frame_indices,
)
from .io import read_events, write_events
from .models import Event, EventStream, Resolution, VoxelGrid
from .voxel import build_voxel_grid, stack_voxel_grids

__all__ = [
    "Event",
    "EventStream",
    "GroupingStrategy",
    "Resolution",
    "VoxelGrid",
    "build_voxel_grid",
    "group_between_frames",
    "group_events",
    "group_fixed_count",
    "group_fixed_duration",
    "read_events",
    "stack_voxel_grids",
    "surviving_frame_indices",
    "write_events",
]
