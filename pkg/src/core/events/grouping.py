"""Event grouping strategies.

Each strategy splits a canonical stream into consecutive groups that become
one voxel grid (and one reconstruction) each:

- fixed event count (sparsity sweep)
- fixed duration (reconstruction-rate sweep)
- between reference frames, optionally discarding frames (irregularity sweep)
"""

import logging
import math
from collections.abc import Sequence
from enum import Enum

import numpy as np

from src.core.events.models import EventStream
from src.utils.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

# Guards ceil() against representation error, e.g. 0.05 / 0.01.
_WINDOW_EPS = 1e-9


class GroupingStrategy(Enum):
    """Available grouping strategies."""

    COUNT = "count"
    DURATION = "duration"
    FRAMES = "frames"


def group_fixed_count(stream: EventStream, n: int) -> list[EventStream]:
    """Split into consecutive groups of exactly ``n`` events.

    The trailing remainder of fewer than ``n`` events is dropped.

    Raises:
        InvalidArgumentError: If ``n < 1``.
    """
    if n < 1:
        raise InvalidArgumentError(f"Group size must be >= 1, got {n}", argument="n")
    return [stream.slice(i * n, (i + 1) * n) for i in range(len(stream) // n)]


def group_fixed_duration(
    stream: EventStream,
    dt: float,
    t0: float | None = None,
    t_end: float | None = None,
) -> list[EventStream]:
    """Split into half-open windows ``[t0 + i*dt, t0 + (i+1)*dt)``.

    Empty windows are kept so the reconstruction cadence stays uniform. The
    last window is closed so the final event is never lost.

    Args:
        stream: Canonical event stream.
        dt: Window duration in seconds.
        t0: First window start; defaults to the first event time.
        t_end: Time that must be covered; defaults to the last event time.

    Raises:
        InvalidArgumentError: If ``dt <= 0``.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"Window duration must be positive, got {dt}", argument="dt")
    if len(stream) == 0 and (t0 is None or t_end is None):
        return []

    start = float(stream.t[0]) if t0 is None else float(t0)
    stop = float(stream.t[-1]) if t_end is None else float(t_end)
    count = max(1, math.ceil((stop - start) / dt - _WINDOW_EPS))

    edges = start + dt * np.arange(count + 1, dtype=np.float64)
    lo = np.searchsorted(stream.t, edges[:-1], side="left")
    hi = np.searchsorted(stream.t, edges[1:], side="left")
    hi[-1] = np.searchsorted(stream.t, max(edges[-1], stop), side="right")

    return [
        stream.slice(int(lo[i]), int(hi[i]), t_start=float(edges[i]), t_end=float(edges[i + 1]))
        for i in range(count)
    ]


def surviving_frame_indices(
    num_frames: int,
    discard_ratio: float,
    seed: int,
) -> np.ndarray:
    """Indices of frames kept after randomly discarding interior frames.

    ``floor(discard_ratio * num_frames)`` interior frames are removed uniformly
    without replacement; the first and last frame always survive.
    """
    interior = np.arange(1, num_frames - 1)
    n_remove = min(math.floor(discard_ratio * num_frames + _WINDOW_EPS), interior.size)
    if n_remove == 0:
        return np.arange(num_frames)
    rng = np.random.default_rng(seed)
    removed = rng.choice(interior, size=n_remove, replace=False)
    return np.setdiff1d(np.arange(num_frames), removed)


def group_between_frames(
    stream: EventStream,
    frame_times: Sequence[float] | np.ndarray,
    discard_ratio: float = 0.0,
    seed: int = 0,
) -> list[EventStream]:
    """Aggregate events between consecutive surviving frame times.

    Each group covers ``[t_a, t_b)`` for surviving neighbours ``a < b``; the
    last group is closed at the final frame time.

    Raises:
        InvalidArgumentError: If fewer than two frame times are given, they are
            not strictly increasing, or ``discard_ratio`` is outside ``[0, 1]``.
    """
    times = np.asarray(frame_times, dtype=np.float64).reshape(-1)
    if times.size < 2:
        raise InvalidArgumentError("At least two frame times are required", argument="frame_times")
    if not np.all(np.diff(times) > 0):
        raise InvalidArgumentError("Frame times must be strictly increasing", argument="frame_times")
    if not 0.0 <= discard_ratio <= 1.0:
        raise InvalidArgumentError(
            f"Discard ratio must lie in [0, 1], got {discard_ratio}", argument="discard_ratio"
        )

    kept = times[surviving_frame_indices(times.size, discard_ratio, seed)]
    if kept.size < times.size:
        logger.debug(f"Discarded {times.size - kept.size} of {times.size} frames (ratio={discard_ratio})")

    lo = np.searchsorted(stream.t, kept[:-1], side="left")
    hi = np.searchsorted(stream.t, kept[1:], side="left")
    hi[-1] = np.searchsorted(stream.t, kept[-1], side="right")
    return [
        stream.slice(int(lo[i]), int(hi[i]), t_start=float(kept[i]), t_end=float(kept[i + 1]))
        for i in range(kept.size - 1)
    ]


def group_events(
    stream: EventStream,
    strategy: GroupingStrategy | str,
    *,
    count: int | None = None,
    dt: float | None = None,
    frame_times: Sequence[float] | np.ndarray | None = None,
    discard_ratio: float = 0.0,
    seed: int = 0,
    t0: float | None = None,
    t_end: float | None = None,
) -> list[EventStream]:
    """Dispatch to a grouping strategy by name.

    Raises:
        InvalidArgumentError: If the strategy is unknown or its parameter is missing.
    """
    try:
        kind = GroupingStrategy(strategy) if isinstance(strategy, str) else strategy
    except ValueError as e:
        raise InvalidArgumentError(f"Unknown grouping strategy: {strategy}", argument="grouping") from e

    if kind is GroupingStrategy.COUNT:
        if count is None:
            raise InvalidArgumentError("Count grouping needs 'count'", argument="count")
        return group_fixed_count(stream, count)
    if kind is GroupingStrategy.DURATION:
        if dt is None:
            raise InvalidArgumentError("Duration grouping needs 'dt'", argument="dt")
        return group_fixed_duration(stream, dt, t0=t0, t_end=t_end)
    if frame_times is None:
        raise InvalidArgumentError("Frame grouping needs 'frame_times'", argument="frame_times")
    return group_between_frames(stream, frame_times, discard_ratio=discard_ratio, seed=seed)
