"""Teacher interface supplying semantic features and categorical masks."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

__all__ = ["TeacherBundle", "TeacherProvider"]


@dataclass(frozen=True)
class TeacherBundle:
    """Teacher output for one frame.

    Attributes:
        feature: ``(C, h, w)`` float32 feature ``F_sam`` at the event-feature shape.
        masks: ``(N, hm, wm)`` boolean masks ranked by importance, zero-padded.
        category_ids: ``(N,)`` int32 labels; 0 marks a padding mask.
    """

    feature: np.ndarray
    masks: np.ndarray
    category_ids: np.ndarray

    @property
    def num_masks(self) -> int:
        return int(self.masks.shape[0])

    def truncate(self, num_masks: int) -> TeacherBundle:
        """Keep the first ``num_masks`` masks, zero-padding when fewer are stored."""
        if num_masks <= self.num_masks:
            return TeacherBundle(self.feature, self.masks[:num_masks], self.category_ids[:num_masks])
        pad = num_masks - self.num_masks
        masks = np.concatenate([self.masks, np.zeros((pad, *self.masks.shape[1:]), dtype=bool)])
        ids = np.concatenate([self.category_ids, np.zeros(pad, dtype=np.int32)])
        return TeacherBundle(self.feature, masks, ids)

    def union_mask(self) -> np.ndarray:
        """``(hm, wm)`` pixels covered by any category."""
        if self.num_masks == 0:
            return np.zeros(self.masks.shape[1:], dtype=bool)
        return self.masks.any(axis=0)

    def equals(self, other: TeacherBundle) -> bool:
        return (
            np.array_equal(self.feature, other.feature)
            and np.array_equal(self.masks, other.masks)
            and np.array_equal(self.category_ids, other.category_ids)
        )


class TeacherProvider(abc.ABC):
    """Deterministic per-frame teacher, consulted only when building the cache.

    Args:
        feature_shape: ``(C, h, w)`` of the event feature the bundle must match.
        mask_size: ``(hm, wm)`` of the masks.
        num_masks: Masks kept per frame.
    """

    name: str = "base"

    def __init__(self, feature_shape: tuple[int, int, int], mask_size: tuple[int, int], num_masks: int = 10):
        self.feature_shape = tuple(int(v) for v in feature_shape)
        self.mask_size = tuple(int(v) for v in mask_size)
        self.num_masks = int(num_masks)

    @abc.abstractmethod
    def extract(self, frame: np.ndarray, sprite_masks: np.ndarray) -> TeacherBundle:
        """Produce the bundle of one frame.

        Args:
            frame: ``(H, W)`` intensity image in ``[0, 1]``.
            sprite_masks: ``(S, H, W)`` visibility masks of the frame.
        """
