"""Scene description and generated ground truth for the synthetic renderer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.core.events.models import EventStream, Resolution
from src.utils.exceptions import InvalidArgumentError

__all__ = ["SceneConfig", "SceneSequence", "SceneSpec", "SequenceMeta", "Sprite"]


class SceneConfig(BaseModel):
    """Parameters for drawing random desk-scale scenes.

    Attributes:
        width: Canvas width in pixels.
        height: Canvas height in pixels.
        duration: Sequence length in seconds.
        frame_rate: Rendered frames per second.
        min_sprites: Fewest sprites per scene.
        max_sprites: Most sprites per scene.
        sprite_min_size: Smallest sprite side in pixels.
        sprite_max_size: Largest sprite side in pixels.
        max_speed: Largest per-axis sprite speed in pixels per second.
        epsilon_min: Lower bound of the contrast threshold range.
        epsilon_max: Upper bound of the contrast threshold range.
        offset: Log offset ``c`` in ``log(I + c)``.
    """

    width: int = Field(default=64, ge=8)
    height: int = Field(default=64, ge=8)
    duration: float = Field(default=2.0, gt=0.0)
    frame_rate: float = Field(default=50.0, gt=0.0)
    min_sprites: int = Field(default=2, ge=0)
    max_sprites: int = Field(default=4, ge=0)
    sprite_min_size: int = Field(default=10, ge=2)
    sprite_max_size: int = Field(default=24, ge=2)
    max_speed: float = Field(default=40.0, ge=0.0)
    epsilon_min: float = Field(default=0.1, gt=0.0)
    epsilon_max: float = Field(default=1.5, gt=0.0)
    offset: float = Field(default=1e-3, gt=0.0)

    @model_validator(mode="after")
    def check_ranges(self) -> SceneConfig:
        if self.min_sprites > self.max_sprites:
            raise ValueError("min_sprites must not exceed max_sprites")
        if self.sprite_min_size > self.sprite_max_size:
            raise ValueError("sprite_min_size must not exceed sprite_max_size")
        if self.epsilon_min > self.epsilon_max:
            raise ValueError("epsilon_min must not exceed epsilon_max")
        return self

    @property
    def resolution(self) -> Resolution:
        return self.width, self.height


@dataclass
class Sprite:
    """A textured patch moving on a straight line.

    The patch's top-left corner sits at ``position + velocity * t``.

    Attributes:
        texture: Grayscale patch ``(h, w)`` in ``[0, 1]``.
        shape: Boolean support of the patch, same shape as ``texture``.
        position: ``(x, y)`` of the top-left corner at ``t = 0`` in pixels.
        velocity: ``(vx, vy)`` in pixels per second.
        z_order: Larger values are drawn on top.
    """

    texture: np.ndarray
    shape: np.ndarray
    position: tuple[float, float]
    velocity: tuple[float, float]
    z_order: int = 0

    def __post_init__(self) -> None:
        self.texture = np.asarray(self.texture, dtype=np.float64)
        self.shape = np.asarray(self.shape, dtype=bool)
        if self.texture.ndim != 2 or self.texture.shape != self.shape.shape:
            raise InvalidArgumentError("Sprite texture and shape must be equal 2-D arrays", argument="texture")
        if self.texture.size and (self.texture.min() < 0.0 or self.texture.max() > 1.0):
            raise InvalidArgumentError("Sprite texture must lie in [0, 1]", argument="texture")

    def position_at(self, t: float) -> tuple[float, float]:
        return (
            self.position[0] + self.velocity[0] * t,
            self.position[1] + self.velocity[1] * t,
        )


@dataclass
class SceneSpec:
    """Full description of one synthetic sequence.

    Attributes:
        resolution: Canvas ``(width, height)``.
        duration: Seconds covered by the frames.
        frame_rate: Frames per second; the inter-frame interval is ``1 / frame_rate``.
        background: Static ``(H, W)`` image in ``[0, 1]``.
        sprites: Moving sprites.
        epsilon: Contrast threshold for event generation.
        offset: Log offset ``c``.
        seed: Seed the scene was drawn from.
    """

    resolution: Resolution
    duration: float
    frame_rate: float
    background: np.ndarray
    sprites: list[Sprite] = field(default_factory=list)
    epsilon: float = 0.5
    offset: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        width, height = self.resolution
        self.background = np.asarray(self.background, dtype=np.float64)
        if self.background.shape != (height, width):
            raise InvalidArgumentError(
                f"Background shape {self.background.shape} does not match resolution {self.resolution}",
                argument="background",
            )
        if self.background.min() < 0.0 or self.background.max() > 1.0:
            raise InvalidArgumentError("Background must lie in [0, 1]", argument="background")
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}", argument="epsilon")
        if not self.offset > 0:
            raise InvalidArgumentError(f"offset must be positive, got {self.offset}", argument="offset")

    @property
    def num_frames(self) -> int:
        return int(round(self.duration * self.frame_rate))

    def frame_times(self) -> np.ndarray:
        return np.arange(self.num_frames, dtype=np.float64) / self.frame_rate


@dataclass(frozen=True)
class SequenceMeta:
    """Key facts stored next to a generated sequence."""

    name: str
    resolution: Resolution
    epsilon: float
    offset: float
    seed: int
    frame_rate: float
    num_frames: int
    num_sprites: int


@dataclass
class SceneSequence:
    """Rendered ground truth of one scene.

    Attributes:
        frames: ``(K, H, W)`` intensities in ``[0, 1]``.
        flows: ``(K-1, 2, H, W)`` backward flow; ``flows[k-1]`` maps frame ``k``
            onto frame ``k-1`` as ``(dx, dy)`` pixel displacements.
        masks: ``(K, S, H, W)`` visible-pixel masks, one per sprite.
        frame_times: ``(K,)`` seconds.
        events: Event stream, empty until simulated.
        meta: Sequence facts when loaded from or bound to a directory.
    """

    frames: np.ndarray
    flows: np.ndarray
    masks: np.ndarray
    frame_times: np.ndarray
    events: EventStream | None = None
    meta: SequenceMeta | None = None

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def resolution(self) -> Resolution:
        return int(self.frames.shape[2]), int(self.frames.shape[1])
