"""Oracle teacher built from synthetic ground truth.

Features come from a frozen, seeded random convolutional pyramid applied to
the frame; masks are the renderer's sprite masks ranked by visible area.
"""

import logging
import math

import numpy as np
import torch
import torch.nn.functional as F

from src.core.semantics.teacher.base import TeacherBundle, TeacherProvider

logger = logging.getLogger(__name__)

_PYRAMID_WIDTHS = (16, 32)


class OracleTeacher(TeacherProvider):
    """Frozen random-feature teacher with ground-truth masks."""

    name = "oracle"

    def __init__(
        self,
        feature_shape: tuple[int, int, int],
        mask_size: tuple[int, int],
        num_masks: int = 10,
        seed: int = 0,
    ):
        super().__init__(feature_shape, mask_size, num_masks)
        self.seed = seed
        generator = torch.Generator().manual_seed(seed)
        widths = [1, *_PYRAMID_WIDTHS, self.feature_shape[0]]
        self._weights: list[torch.Tensor] = []
        self._strides = [2, 2, 1]
        for c_in, c_out in zip(widths[:-1], widths[1:], strict=True):
            std = math.sqrt(2.0 / (c_in * 9))
            self._weights.append(torch.randn(c_out, c_in, 3, 3, generator=generator, dtype=torch.float64) * std)

    @torch.no_grad()
    def features(self, frame: np.ndarray) -> np.ndarray:
        x = torch.from_numpy(np.asarray(frame, dtype=np.float64))[None, None]
        for i, (weight, stride) in enumerate(zip(self._weights, self._strides, strict=True)):
            x = F.conv2d(x, weight, stride=stride, padding=1)
            if i < len(self._weights) - 1:
                x = F.relu(x)
        _, h, w = self.feature_shape
        x = F.interpolate(x, size=(h, w), mode="bilinear", align_corners=False)
        return x[0].numpy().astype(np.float32)

    def rank_masks(self, sprite_masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Top visible sprite masks by area, resized and zero-padded to ``num_masks``.

        Ties in area keep sprite order. Sprites with no visible pixel are not categories.
        """
        sprite_masks = np.asarray(sprite_masks, dtype=bool)
        hm, wm = self.mask_size
        out = np.zeros((self.num_masks, hm, wm), dtype=bool)
        ids = np.zeros(self.num_masks, dtype=np.int32)
        if sprite_masks.size == 0:
            return out, ids

        areas = sprite_masks.reshape(sprite_masks.shape[0], -1).sum(axis=1)
        ranked = [int(i) for i in np.argsort(-areas, kind="stable") if areas[i] > 0][: self.num_masks]
        if ranked:
            chosen = torch.from_numpy(sprite_masks[ranked].astype(np.float32))[None]
            resized = F.interpolate(chosen, size=(hm, wm), mode="nearest")[0].numpy() > 0.5
            out[: len(ranked)] = resized
            ids[: len(ranked)] = np.asarray(ranked, dtype=np.int32) + 1
        return out, ids

    def extract(self, frame: np.ndarray, sprite_masks: np.ndarray) -> TeacherBundle:
        masks, ids = self.rank_masks(sprite_masks)
        return TeacherBundle(feature=self.features(frame), masks=masks, category_ids=ids)
