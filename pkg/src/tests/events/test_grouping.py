"""Tests for event grouping strategies."""

import numpy as np
import pytest

from src.core.events import (
    EventStream,
    GroupingStrategy,
    group_between_frames,
    group_events,
    group_fixed_count,
    group_fixed_duration,
    surviving_frame_indices,
)
from src.utils.exceptions import InvalidArgumentError

RES = (4, 4)


def _stream(times: list[float]) -> EventStream:
    n = len(times)
    return EventStream.create(times, [0] * n, [0] * n, [1] * n, RES)


class TestFixedCount:
    def test_drops_trailing_remainder(self):
        groups = group_fixed_count(_stream([0.1 * i for i in range(7)]), 3)
        assert [len(g) for g in groups] == [3, 3]

    def test_rejects_non_positive_count(self):
        with pytest.raises(InvalidArgumentError):
            group_fixed_count(_stream([0.0]), 0)


class TestFixedDuration:
    def test_keeps_empty_windows(self):
        """Windows of 0.1 s over [0, 0.3]; the middle one holds nothing."""
        groups = group_fixed_duration(_stream([0.05, 0.25]), 0.1, t0=0.0, t_end=0.3)
        assert [len(g) for g in groups] == [1, 0, 1]
        np.testing.assert_allclose([g.window for g in groups], [[0.0, 0.1], [0.1, 0.2], [0.2, 0.3]])

    def test_last_event_is_never_lost(self):
        groups = group_fixed_duration(_stream([0.0, 0.1, 0.2]), 0.1)
        assert sum(len(g) for g in groups) == 3

    def test_rejects_non_positive_duration(self):
        with pytest.raises(InvalidArgumentError):
            group_fixed_duration(_stream([0.0]), 0.0)


class TestBetweenFrames:
    def test_half_open_intervals_with_closed_last(self):
        groups = group_between_frames(_stream([0.0, 0.1, 0.15, 0.2]), [0.0, 0.1, 0.2])
        assert [len(g) for g in groups] == [1, 3]
        assert groups[1].window == (0.1, 0.2)

    def test_discard_keeps_endpoints(self):
        kept = surviving_frame_indices(10, 0.3, seed=4)
        assert kept.size == 7
        assert kept[0] == 0
        assert kept[-1] == 9

    def test_zero_ratio_keeps_every_frame(self):
        np.testing.assert_array_equal(surviving_frame_indices(6, 0.0, seed=1), np.arange(6))

    def test_discard_is_seeded(self):
        assert surviving_frame_indices(20, 0.5, 7).tolist() == surviving_frame_indices(20, 0.5, 7).tolist()

    def test_discarded_groups_cover_all_events(self):
        times = np.linspace(0.0, 1.0, 11)
        stream = _stream(list(np.linspace(0.0, 1.0, 101)))
        groups = group_between_frames(stream, times, discard_ratio=0.5, seed=2)
        assert len(groups) == 11 - 5 - 1
        assert sum(len(g) for g in groups) == len(stream)

    @pytest.mark.parametrize("times", [[0.0], [0.0, 0.0, 0.1]])
    def test_rejects_bad_frame_times(self, times):
        with pytest.raises(InvalidArgumentError):
            group_between_frames(_stream([0.0]), times)


def test_dispatch_by_name():
    stream = _stream([0.0, 0.1, 0.2, 0.3])
    assert len(group_events(stream, "count", count=2)) == 2
    assert len(group_events(stream, GroupingStrategy.DURATION, dt=0.15)) == 2
    assert len(group_events(stream, "frames", frame_times=[0.0, 0.3])) == 1


def test_dispatch_errors():
    stream = _stream([0.0])
    with pytest.raises(InvalidArgumentError):
        group_events(stream, "spiral")
    with pytest.raises(InvalidArgumentError):
        group_events(stream, "duration")
