"""Tests for the contrast-threshold event simulator."""

import math

import numpy as np
import pytest

from src.core.synth.generator import random_scene_spec
from src.core.synth.models import SceneConfig, SceneSpec, Sprite
from src.core.synth.renderer import render_sequence
from src.core.synth.simulator import reconstruct_log_intensity_oracle, simulate_events
from src.utils.exceptions import InvalidArgumentError

OFFSET = 1e-3


def _ramp(factor: float, eps: float) -> np.ndarray:
    """A 1x1 video whose log intensity moves by ``factor * eps``."""
    first = 0.2
    second = (first + OFFSET) * math.exp(factor * eps) - OFFSET
    return np.array([[[first]], [[second]]])


class TestSimulateEvents:
    def test_brightening_fires_positive_events_at_crossings(self):
        """A change of 2.5 thresholds fires two events at 40% and 80% of the interval."""
        stream = simulate_events(_ramp(2.5, 0.2), [0.0, 1.0], epsilon=0.2, offset=OFFSET)
        assert len(stream) == 2
        assert stream.p.tolist() == [1, 1]
        np.testing.assert_allclose(stream.t, [0.4, 0.8], atol=1e-9)

    def test_darkening_fires_negative_events(self):
        stream = simulate_events(_ramp(-3.2, 0.2), [0.0, 1.0], epsilon=0.2, offset=OFFSET)
        assert stream.p.tolist() == [-1, -1, -1]

    def test_exact_threshold_counts_as_crossing(self):
        stream = simulate_events(_ramp(1.0, 0.3), [0.0, 1.0], epsilon=0.3, offset=OFFSET)
        assert len(stream) == 1

    def test_static_video_is_silent(self):
        video = np.full((4, 3, 3), 0.5)
        stream = simulate_events(video, [0.0, 0.1, 0.2, 0.3], epsilon=0.1)
        assert len(stream) == 0
        assert stream.window == (0.0, 0.3)

    def test_reference_carries_residual_across_frames(self):
        """Two steps of 0.6 thresholds each add up to one event in the second interval."""
        eps = 0.25
        levels = [0.2, (0.2 + OFFSET) * math.exp(0.6 * eps) - OFFSET, (0.2 + OFFSET) * math.exp(1.2 * eps) - OFFSET]
        video = np.array(levels).reshape(3, 1, 1)
        stream = simulate_events(video, [0.0, 1.0, 2.0], epsilon=eps, offset=OFFSET)
        assert len(stream) == 1
        assert 1.0 <= stream.t[0] <= 2.0

    @pytest.mark.parametrize(
        ("frames", "times", "eps"),
        [
            (np.zeros((1, 2, 2)), [0.0], 0.1),
            (np.zeros((2, 2, 2)), [0.0], 0.1),
            (np.zeros((2, 2, 2)), [0.1, 0.1], 0.1),
            (np.zeros((2, 2, 2)), [0.0, 0.1], 0.0),
        ],
    )
    def test_rejects_invalid_input(self, frames, times, eps):
        with pytest.raises(InvalidArgumentError):
            simulate_events(frames, times, eps)


def test_integrated_events_stay_within_one_threshold():
    """Summing eps * p per pixel recovers the last frame's log intensity to within eps."""
    config = SceneConfig(width=24, height=24, duration=0.2, sprite_min_size=6, sprite_max_size=10)
    for seed in range(20):
        spec = random_scene_spec(config, seed)
        sequence = render_sequence(spec)
        events = simulate_events(sequence.frames, sequence.frame_times, spec.epsilon, spec.offset)
        recon = reconstruct_log_intensity_oracle(events, sequence.frames[0], spec.epsilon, spec.offset)
        error = np.abs(np.log(recon + spec.offset) - np.log(sequence.frames[-1] + spec.offset))
        assert error.max() <= spec.epsilon + 1e-9


def _counts_per_pixel(stream, width: int, height: int) -> np.ndarray:
    return np.bincount(stream.y * width + stream.x, minlength=width * height)


def test_reversed_ramp_flips_every_polarity():
    rng = np.random.default_rng(2)
    start = rng.uniform(0.05, 0.3, (3, 4))
    rates = rng.uniform(0.5, 2.0, (3, 4))
    video = np.stack([np.clip(start * np.exp(rates * k), 0.0, 1.0) for k in range(5)])
    times = np.linspace(0.0, 0.08, 5)

    forward = simulate_events(video, times, epsilon=0.15, offset=OFFSET)
    backward = simulate_events(video[::-1].copy(), times, epsilon=0.15, offset=OFFSET)

    assert len(forward) > 0
    assert set(forward.p.tolist()) == {1}
    assert set(backward.p.tolist()) == {-1}
    np.testing.assert_array_equal(_counts_per_pixel(forward, 4, 3), _counts_per_pixel(backward, 4, 3))


def _single_sprite_scene(speed: float) -> SceneSpec:
    sprite = Sprite(
        texture=np.full((8, 8), 0.9),
        shape=np.ones((8, 8), dtype=bool),
        position=(4.0, 12.0),
        velocity=(speed, 0.0),
    )
    return SceneSpec(
        resolution=(48, 32),
        duration=0.3,
        frame_rate=50.0,
        background=np.full((32, 48), 0.2),
        sprites=[sprite],
        epsilon=0.3,
    )


def test_faster_motion_never_fires_fewer_events():
    counts = []
    for speed in (0.0, 20.0, 40.0, 80.0):
        spec = _single_sprite_scene(speed)
        sequence = render_sequence(spec)
        counts.append(len(simulate_events(sequence.frames, sequence.frame_times, spec.epsilon, spec.offset)))
    assert counts[0] == 0
    assert counts == sorted(counts)
    assert counts[-1] > counts[1]
