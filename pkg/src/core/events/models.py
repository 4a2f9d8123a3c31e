"""Event data model: single events, canonical streams and voxel grids."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from src.utils.exceptions import ErrorCode, EventFormatError

__all__ = ["Event", "EventStream", "Resolution", "VoxelGrid"]

Resolution = tuple[int, int]
"""Sensor size as ``(width, height)``."""


@dataclass(frozen=True, slots=True)
class Event:
    """A single polarity spike.

    Attributes:
        t: Timestamp in seconds.
        x: Column index.
        y: Row index.
        p: Polarity, +1 or -1.
    """

    t: float
    x: int
    y: int
    p: int


@dataclass(frozen=True)
class EventStream:
    """Struct-of-arrays event container sorted by ``(t, y, x, p)``.

    Build instances through :meth:`create` (validates and sorts) or
    :meth:`empty`; slicing an existing stream keeps it canonical.

    Attributes:
        t: float64 timestamps in seconds, non-decreasing.
        x: int64 column indices.
        y: int64 row indices.
        p: int8 polarities in {+1, -1}.
        resolution: Sensor size ``(width, height)``.
        t_start: Optional window start; defaults to the first timestamp.
        t_end: Optional window end; defaults to the last timestamp.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    resolution: Resolution
    t_start: float | None = field(default=None)
    t_end: float | None = field(default=None)

    @classmethod
    def create(
        cls,
        t: Sequence[float] | np.ndarray,
        x: Sequence[int] | np.ndarray,
        y: Sequence[int] | np.ndarray,
        p: Sequence[int] | np.ndarray,
        resolution: Resolution,
        t_start: float | None = None,
        t_end: float | None = None,
    ) -> EventStream:
        """Validate raw columns and return a canonically ordered stream.

        Raises:
            EventFormatError: If columns disagree in length, a polarity is not
                +-1, a coordinate is outside the sensor or a timestamp is negative.
        """
        t_arr = np.asarray(t, dtype=np.float64).reshape(-1)
        x_arr = np.asarray(x, dtype=np.int64).reshape(-1)
        y_arr = np.asarray(y, dtype=np.int64).reshape(-1)
        p_arr = np.asarray(p, dtype=np.int8).reshape(-1)
        width, height = int(resolution[0]), int(resolution[1])

        n = t_arr.size
        if not (x_arr.size == y_arr.size == p_arr.size == n):
            raise EventFormatError(
                "Event columns have different lengths",
                error_code=ErrorCode.EVENTS_INVALID_CONTENT,
                details={"lengths": [n, x_arr.size, y_arr.size, p_arr.size]},
            )
        if width < 1 or height < 1:
            raise EventFormatError(
                f"Invalid resolution {resolution}",
                error_code=ErrorCode.EVENTS_INVALID_CONTENT,
            )
        if n:
            if not np.all(np.abs(p_arr) == 1):
                raise EventFormatError(
                    "Polarity must be +1 or -1",
                    error_code=ErrorCode.EVENTS_INVALID_CONTENT,
                )
            if x_arr.min() < 0 or x_arr.max() >= width or y_arr.min() < 0 or y_arr.max() >= height:
                raise EventFormatError(
                    f"Event coordinates outside the {width}x{height} sensor",
                    error_code=ErrorCode.EVENTS_INVALID_CONTENT,
                )
            if not np.all(np.isfinite(t_arr)) or t_arr.min() < 0:
                raise EventFormatError(
                    "Timestamps must be finite and non-negative",
                    error_code=ErrorCode.EVENTS_INVALID_CONTENT,
                )

        # lexsort keys run from least to most significant
        order = np.lexsort((p_arr, x_arr, y_arr, t_arr))
        return cls(
            t=t_arr[order],
            x=x_arr[order],
            y=y_arr[order],
            p=p_arr[order],
            resolution=(width, height),
            t_start=t_start,
            t_end=t_end,
        )

    @classmethod
    def empty(
        cls,
        resolution: Resolution,
        t_start: float | None = None,
        t_end: float | None = None,
    ) -> EventStream:
        return cls.create([], [], [], [], resolution, t_start=t_start, t_end=t_end)

    @classmethod
    def from_events(cls, events: Sequence[Event], resolution: Resolution) -> EventStream:
        return cls.create(
            [e.t for e in events],
            [e.x for e in events],
            [e.y for e in events],
            [e.p for e in events],
            resolution,
        )

    def __len__(self) -> int:
        return int(self.t.size)

    def __iter__(self) -> Iterator[Event]:
        for t, x, y, p in zip(self.t, self.x, self.y, self.p, strict=True):
            yield Event(float(t), int(x), int(y), int(p))

    @property
    def window(self) -> tuple[float, float]:
        """Covered interval ``(t_start, t_end)``; ``(0, 0)`` for an unbounded empty stream."""
        start = self.t_start
        end = self.t_end
        if start is None:
            start = float(self.t[0]) if len(self) else (end if end is not None else 0.0)
        if end is None:
            end = float(self.t[-1]) if len(self) else start
        return float(start), float(end)

    def slice(
        self,
        start: int,
        stop: int,
        t_start: float | None = None,
        t_end: float | None = None,
    ) -> EventStream:
        """Return events ``[start, stop)`` as a new stream with an optional window."""
        return EventStream(
            t=self.t[start:stop],
            x=self.x[start:stop],
            y=self.y[start:stop],
            p=self.p[start:stop],
            resolution=self.resolution,
            t_start=t_start,
            t_end=t_end,
        )

    def with_polarity_scale(self, factor: int) -> EventStream:
        """Return a copy with every polarity multiplied by ``factor`` (no validation)."""
        return EventStream(
            t=self.t.copy(),
            x=self.x.copy(),
            y=self.y.copy(),
            p=(self.p.astype(np.int64) * factor).astype(np.int8),
            resolution=self.resolution,
            t_start=self.t_start,
            t_end=self.t_end,
        )

    def polarity_sum(self) -> int:
        return int(self.p.astype(np.int64).sum())


@dataclass(frozen=True)
class VoxelGrid:
    """Spatio-temporal accumulation of one event group.

    ``data`` is stored channel-first as ``(B, H, W)`` float64 so it can be fed
    to convolutional layers without transposition.
    """

    data: np.ndarray
    t_start: float
    t_end: float

    @property
    def num_bins(self) -> int:
        return int(self.data.shape[0])

    @property
    def resolution(self) -> Resolution:
        return int(self.data.shape[2]), int(self.data.shape[1])

    def total(self) -> float:
        return float(self.data.sum())
