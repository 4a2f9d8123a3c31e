"""Nearest ground-truth frame lookup."""

from collections.abc import Sequence

import numpy as np

DEFAULT_TOLERANCE = 1e-3


def match_nearest_frame(
    recon_time: float,
    gt_times: Sequence[float] | np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
) -> int | None:
    """Index of the nearest frame within ``tolerance`` seconds, else ``None``.

    ``gt_times`` must be sorted; equidistant neighbours resolve to the earlier one.
    """
    times = np.asarray(gt_times, dtype=np.float64)
    if times.size == 0:
        return None
    right = int(np.searchsorted(times, recon_time, side="left"))
    candidates = [i for i in (right - 1, right) if 0 <= i < times.size]
    best = min(candidates, key=lambda i: (abs(times[i] - recon_time), i))
    if abs(times[best] - recon_time) <= tolerance:
        return best
    return None
