"""Tests for teacher bundles and the oracle teacher."""

import numpy as np
import pytest

from src.core.semantics.teacher import OracleTeacher, TeacherBundle, get_teacher
from src.utils.exceptions import InvalidArgumentError


def _bundle(num_masks: int = 3) -> TeacherBundle:
    masks = np.zeros((num_masks, 4, 4), dtype=bool)
    for i in range(num_masks):
        masks[i, i % 4, :] = True
    return TeacherBundle(
        feature=np.arange(2 * 2 * 2, dtype=np.float32).reshape(2, 2, 2),
        masks=masks,
        category_ids=np.arange(1, num_masks + 1, dtype=np.int32),
    )


class TestTeacherBundle:
    def test_truncate_keeps_leading_masks(self):
        bundle = _bundle(3).truncate(2)
        assert bundle.num_masks == 2
        assert bundle.category_ids.tolist() == [1, 2]

    def test_truncate_pads_with_empty_masks(self):
        bundle = _bundle(2).truncate(5)
        assert bundle.masks.shape == (5, 4, 4)
        assert bundle.category_ids.tolist() == [1, 2, 0, 0, 0]
        assert not bundle.masks[2:].any()

    def test_union_mask(self):
        union = _bundle(2).union_mask()
        assert union[:2].all()
        assert not union[2:].any()

    def test_union_of_no_masks_is_empty(self):
        union = _bundle(2).truncate(0).union_mask()
        assert union.shape == (4, 4)
        assert not union.any()

    def test_equals(self):
        assert _bundle(3).equals(_bundle(3))
        assert not _bundle(3).equals(_bundle(2))


class TestOracleTeacher:
    @pytest.fixture
    def teacher(self) -> OracleTeacher:
        return OracleTeacher(feature_shape=(8, 4, 4), mask_size=(6, 6), num_masks=5, seed=1)

    def test_ranks_by_area_and_drops_invisible_sprites(self, teacher):
        sprites = np.zeros((4, 6, 6), dtype=bool)
        sprites[0, :2, :2] = True
        sprites[1, :3, :3] = True
        sprites[3, 3:, 3:] = True
        masks, ids = teacher.rank_masks(sprites)
        assert ids.tolist() == [2, 4, 1, 0, 0]
        np.testing.assert_array_equal(masks[0], sprites[1])
        np.testing.assert_array_equal(masks[1], sprites[3])
        assert not masks[3:].any()

    def test_keeps_top_n(self):
        teacher = OracleTeacher(feature_shape=(8, 4, 4), mask_size=(6, 6), num_masks=1)
        sprites = np.zeros((2, 6, 6), dtype=bool)
        sprites[0, :1, :1] = True
        sprites[1, :2, :2] = True
        _, ids = teacher.rank_masks(sprites)
        assert ids.tolist() == [2]

    def test_masks_are_resized(self):
        teacher = OracleTeacher(feature_shape=(8, 4, 4), mask_size=(3, 3), num_masks=2)
        sprites = np.ones((1, 6, 6), dtype=bool)
        masks, _ = teacher.rank_masks(sprites)
        assert masks.shape == (2, 3, 3)
        assert masks[0].all()

    def test_no_sprites(self, teacher):
        masks, ids = teacher.rank_masks(np.zeros((0, 6, 6), dtype=bool))
        assert masks.shape == (5, 6, 6)
        assert not ids.any()

    def test_features_match_requested_shape_and_seed(self, teacher):
        frame = np.random.default_rng(0).random((16, 16))
        feature = teacher.features(frame)
        assert feature.shape == (8, 4, 4)
        assert feature.dtype == np.float32
        np.testing.assert_array_equal(feature, teacher.features(frame))

        other = OracleTeacher(feature_shape=(8, 4, 4), mask_size=(6, 6), seed=2)
        assert not np.array_equal(feature, other.features(frame))

    def test_extract_is_deterministic(self, teacher):
        frame = np.random.default_rng(3).random((12, 12))
        sprites = np.zeros((2, 12, 12), dtype=bool)
        sprites[0, 2:6, 2:6] = True
        assert teacher.extract(frame, sprites).equals(teacher.extract(frame, sprites))


class TestRegistry:
    def test_oracle_by_name(self):
        teacher = get_teacher("Oracle", feature_shape=(4, 2, 2), mask_size=(3, 3), num_masks=2)
        assert isinstance(teacher, OracleTeacher)
        assert teacher.num_masks == 2

    def test_unknown_teacher(self):
        with pytest.raises(InvalidArgumentError, match="Unknown teacher"):
            get_teacher("sam", feature_shape=(4, 2, 2), mask_size=(3, 3))
