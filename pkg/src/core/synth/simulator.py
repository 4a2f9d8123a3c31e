"""Frame-to-event simulation under the log-intensity contrast model.

Each pixel keeps a reference level ``L_ref``, initialised to ``log(I_0 + c)``.
Across every frame interval the log intensity is assumed to move linearly;
``floor(|theta| / eps)`` events of sign ``theta`` fire for
``theta = log(I_k + c) - L_ref``, each at the time the linear ramp crosses the
next quantised level, and the reference advances by ``eps`` per event.
"""

import logging
from collections.abc import Sequence

import numpy as np

from src.core.events.models import EventStream
from src.utils.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

# Lets theta == eps count as a crossing despite rounding
_CROSSING_EPS = 1e-9


def simulate_events(
    frames: np.ndarray | Sequence[np.ndarray],
    frame_times: np.ndarray | Sequence[float],
    epsilon: float,
    offset: float = 1e-3,
) -> EventStream:
    """Generate events from an intensity video.

    Args:
        frames: ``(K, H, W)`` intensities in ``[0, 1]``.
        frame_times: ``(K,)`` strictly increasing timestamps in seconds.
        epsilon: Contrast threshold.
        offset: Log offset ``c``.

    Returns:
        Canonical stream windowed to ``[frame_times[0], frame_times[-1]]``.

    Raises:
        InvalidArgumentError: On fewer than two frames, mismatched lengths,
            non-monotone times or a non-positive threshold or offset.
    """
    video = np.asarray(frames, dtype=np.float64)
    times = np.asarray(frame_times, dtype=np.float64).reshape(-1)
    if video.ndim != 3 or video.shape[0] < 2:
        raise InvalidArgumentError("At least two 2-D frames are required", argument="frames")
    if times.size != video.shape[0]:
        raise InvalidArgumentError(
            f"{video.shape[0]} frames but {times.size} timestamps", argument="frame_times"
        )
    if not np.all(np.diff(times) > 0):
        raise InvalidArgumentError("Frame times must be strictly increasing", argument="frame_times")
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}", argument="epsilon")
    if not offset > 0:
        raise InvalidArgumentError(f"offset must be positive, got {offset}", argument="offset")

    _, height, width = video.shape
    l_ref = np.log(video[0] + offset).reshape(-1)
    l_prev = l_ref.copy()

    chunks_t: list[np.ndarray] = []
    chunks_pix: list[np.ndarray] = []
    chunks_p: list[np.ndarray] = []
    for k in range(1, video.shape[0]):
        l_cur = np.log(video[k] + offset).reshape(-1)
        theta = l_cur - l_ref
        counts = np.floor(np.abs(theta) / epsilon + _CROSSING_EPS).astype(np.int64)
        active = np.flatnonzero(counts)
        if active.size:
            n = counts[active]
            sign = np.sign(theta[active])
            pix = np.repeat(active, n)
            sgn = np.repeat(sign, n)
            # crossing index j = 1..n within each pixel
            j = np.arange(pix.size) - np.repeat(np.cumsum(n) - n, n) + 1

            level = l_ref[pix] + sgn * j * epsilon
            start = l_prev[pix]
            delta = l_cur[pix] - start
            safe = np.where(delta == 0.0, 1.0, delta)
            frac = np.where(delta == 0.0, 0.0, (level - start) / safe)
            frac = np.clip(frac, 0.0, 1.0)

            chunks_t.append(times[k - 1] + frac * (times[k] - times[k - 1]))
            chunks_pix.append(pix)
            chunks_p.append(sgn.astype(np.int8))
            l_ref[active] += sign * n * epsilon
        l_prev = l_cur

    if chunks_t:
        pix = np.concatenate(chunks_pix)
        stream = EventStream.create(
            np.concatenate(chunks_t),
            pix % width,
            pix // width,
            np.concatenate(chunks_p),
            (width, height),
            t_start=float(times[0]),
            t_end=float(times[-1]),
        )
    else:
        stream = EventStream.empty((width, height), t_start=float(times[0]), t_end=float(times[-1]))
    logger.debug(f"Simulated {len(stream)} events over {video.shape[0]} frames (eps={epsilon:.3f})")
    return stream


def reconstruct_log_intensity_oracle(
    events: EventStream,
    first_frame: np.ndarray,
    epsilon: float,
    offset: float = 1e-3,
) -> np.ndarray:
    """Integrate ``eps * p`` per event onto ``log(I_0 + c)`` and exponentiate back."""
    first = np.asarray(first_frame, dtype=np.float64)
    log_img = np.log(first + offset).reshape(-1)
    if len(events):
        np.add.at(log_img, events.y * first.shape[1] + events.x, epsilon * events.p.astype(np.float64))
    return np.exp(log_img.reshape(first.shape)) - offset
