"""Tests for image metrics and frame matching."""

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from src.core.evaluation import match_nearest_frame, mse, perceptual_distance, ssim
from src.core.losses import PerceptualExtractor
from src.utils.exceptions import InvalidArgumentError


@pytest.fixture(scope="module")
def extractor() -> PerceptualExtractor:
    return PerceptualExtractor(seed=0).double()


@pytest.fixture
def images():
    rng = np.random.default_rng(0)
    return rng.random((32, 32)), rng.random((32, 32)), rng.random((32, 32))


class TestMse:
    def test_identity_and_known_value(self):
        assert mse(np.zeros((4, 4)), np.zeros((4, 4))) == 0.0
        assert mse(np.full((4, 4), 0.5), np.zeros((4, 4))) == 0.25

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            mse(np.zeros((4, 4)), np.zeros((4, 5)))


class TestSsim:
    def test_identical_images(self, images):
        assert ssim(images[0], images[0]) == pytest.approx(1.0)

    def test_is_symmetric_and_below_one(self, images):
        a, b, _ = images
        assert ssim(a, b) == pytest.approx(ssim(b, a))
        assert ssim(a, b) < 0.5

    def test_image_smaller_than_window(self):
        with pytest.raises(InvalidArgumentError, match="smaller"):
            ssim(np.zeros((10, 32)), np.zeros((10, 32)))

    def test_window_size_is_honoured(self, images):
        a, b, _ = images
        assert ssim(a, b, window=7) != pytest.approx(ssim(a, b, window=11), abs=1e-6)
        assert ssim(np.zeros((8, 8)), np.zeros((8, 8)), window=7) == pytest.approx(1.0)

    def test_default_window_matches_skimage_gaussian_ssim(self, images):
        a, b, _ = images
        expected = structural_similarity(
            a, b, data_range=1.0, gaussian_weights=True, sigma=1.5, use_sample_covariance=False
        )
        assert ssim(a, b) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("window", [1, 6])
    def test_rejects_bad_windows(self, images, window):
        with pytest.raises(InvalidArgumentError, match="odd"):
            ssim(images[0], images[1], window=window)


class TestPerceptualDistance:
    def test_identity(self, images, extractor):
        assert perceptual_distance(images[0], images[0], extractor) == 0.0

    def test_symmetry(self, images, extractor):
        a, b, _ = images
        assert perceptual_distance(a, b, extractor) == pytest.approx(perceptual_distance(b, a, extractor), abs=1e-12)

    def test_triangle_inequality(self, images, extractor):
        a, b, c = images
        ab = perceptual_distance(a, b, extractor)
        bc = perceptual_distance(b, c, extractor)
        ac = perceptual_distance(a, c, extractor)
        assert ac <= ab + bc + 1e-12
        assert ac > 0.0


class TestMatchNearestFrame:
    TIMES = [0.0, 0.02, 0.04, 0.06]

    @pytest.mark.parametrize(
        ("recon_time", "expected"),
        [
            (0.02, 1),
            (0.0205, 1),
            (0.0395, 2),
            (0.0215, None),
            (-0.0005, 0),
            (0.0612, None),
        ],
    )
    def test_tolerance_window(self, recon_time, expected):
        assert match_nearest_frame(recon_time, self.TIMES) == expected

    def test_equidistant_picks_earlier_frame(self):
        assert match_nearest_frame(0.01, [0.0, 0.02], tolerance=0.01) == 0

    def test_no_frames(self):
        assert match_nearest_frame(0.0, []) is None

    def test_matches_are_monotone_in_time(self):
        times = np.linspace(0.0, 1.0, 51)
        queries = np.linspace(-0.01, 1.01, 2001)
        matched = [m for m in (match_nearest_frame(t, times, tolerance=0.02) for t in queries) if m is not None]
        assert matched == sorted(matched)
        assert matched[0] == 0
        assert matched[-1] == 50
