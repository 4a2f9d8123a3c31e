"""2-D multi-sprite renderer producing frames, backward flow and visibility masks."""

import logging

import numpy as np
from scipy import ndimage

from src.core.synth.models import SceneSequence, SceneSpec, Sprite
from src.utils.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

# Coverage threshold for the bilinearly sampled sprite support
_COVERAGE = 0.5


def _sample_sprite(sprite: Sprite, t: float, height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Bilinearly sample a sprite onto the canvas at time ``t``.

    Returns:
        ``(values, covered)``: sampled texture and a boolean coverage map.
    """
    px, py = sprite.position_at(t)
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
    coords = np.stack([rows - py, cols - px])
    values = ndimage.map_coordinates(sprite.texture, coords, order=1, mode="constant", cval=0.0)
    support = ndimage.map_coordinates(
        sprite.shape.astype(np.float64), coords, order=1, mode="constant", cval=0.0
    )
    return values, support >= _COVERAGE


def render_sequence(spec: SceneSpec) -> SceneSequence:
    """Render frames, flows and masks of a scene.

    Sprites are composited over the background in ascending ``z_order``. The
    flow ``F_{k->k-1}`` of a pixel is ``-velocity * dt`` of the top-most
    sprite covering it and zero on the background.

    Raises:
        InvalidArgumentError: If the scene implies fewer than two frames.
    """
    num_frames = spec.num_frames
    if num_frames < 2:
        raise InvalidArgumentError(
            f"Scene yields {num_frames} frame(s); at least 2 are required",
            argument="duration",
        )
    width, height = spec.resolution
    times = spec.frame_times()
    order = sorted(range(len(spec.sprites)), key=lambda i: spec.sprites[i].z_order)

    frames = np.empty((num_frames, height, width), dtype=np.float64)
    owners = np.full((num_frames, height, width), -1, dtype=np.int64)
    for k, t in enumerate(times):
        frame = spec.background.copy()
        owner = owners[k]
        for idx in order:
            values, covered = _sample_sprite(spec.sprites[idx], float(t), height, width)
            frame[covered] = values[covered]
            owner[covered] = idx
        frames[k] = np.clip(frame, 0.0, 1.0)

    num_sprites = len(spec.sprites)
    masks = np.stack([owners == i for i in range(num_sprites)], axis=1) if num_sprites else np.zeros(
        (num_frames, 0, height, width), dtype=bool
    )
    for i in range(num_sprites):
        if not masks[:, i].any():
            logger.warning(f"Sprite {i} never enters the {width}x{height} canvas; its masks stay empty")

    flows = np.zeros((num_frames - 1, 2, height, width), dtype=np.float32)
    for k in range(1, num_frames):
        dt = float(times[k] - times[k - 1])
        owner = owners[k]
        for i, sprite in enumerate(spec.sprites):
            on = owner == i
            flows[k - 1, 0][on] = -sprite.velocity[0] * dt
            flows[k - 1, 1][on] = -sprite.velocity[1] * dt

    logger.debug(f"Rendered {num_frames} frames with {num_sprites} sprites at {width}x{height}")
    return SceneSequence(frames=frames, flows=flows, masks=masks, frame_times=times)
