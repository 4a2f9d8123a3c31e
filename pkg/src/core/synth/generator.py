"""Random desk-scale scenes and dataset generation."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy import ndimage
from tqdm import tqdm

from src.core.synth.dataset import write_sequence
from src.core.synth.models import SceneConfig, SceneSequence, SceneSpec, SequenceMeta, Sprite
from src.core.synth.renderer import render_sequence
from src.core.synth.simulator import simulate_events
from src.utils.exceptions import DatasetError, ErrorCode

logger = logging.getLogger(__name__)


def _rescale(img: np.ndarray, low: float, high: float) -> np.ndarray:
    span = img.max() - img.min()
    unit = (img - img.min()) / span if span > 0 else np.zeros_like(img)
    return low + (high - low) * unit


def _random_sprite(rng: np.random.Generator, config: SceneConfig, z_order: int) -> Sprite:
    h, w = rng.integers(config.sprite_min_size, config.sprite_max_size + 1, size=2)
    texture = ndimage.gaussian_filter(rng.random((h, w)), sigma=1.5)
    low = rng.uniform(0.0, 0.5)
    texture = _rescale(texture, low, min(1.0, low + rng.uniform(0.3, 0.5)))

    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    shape = ((rows - cy) / (h / 2.0)) ** 2 + ((cols - cx) / (w / 2.0)) ** 2 <= 1.0

    position = (
        float(rng.uniform(-w / 2.0, config.width - w / 2.0)),
        float(rng.uniform(-h / 2.0, config.height - h / 2.0)),
    )
    velocity = (
        float(rng.uniform(-config.max_speed, config.max_speed)),
        float(rng.uniform(-config.max_speed, config.max_speed)),
    )
    return Sprite(texture=texture, shape=shape, position=position, velocity=velocity, z_order=z_order)


def random_scene_spec(config: SceneConfig, seed: int) -> SceneSpec:
    """Draw a scene: smooth background, textured elliptical sprites, random linear motion.

    The contrast threshold is drawn uniformly from ``[epsilon_min, epsilon_max]``.
    """
    rng = np.random.default_rng(seed)
    background = ndimage.gaussian_filter(rng.random((config.height, config.width)), sigma=4.0)
    background = _rescale(background, 0.1, 0.9)

    num_sprites = int(rng.integers(config.min_sprites, config.max_sprites + 1))
    z_orders = rng.permutation(num_sprites)
    sprites = [_random_sprite(rng, config, int(z_orders[i])) for i in range(num_sprites)]
    epsilon = float(rng.uniform(config.epsilon_min, config.epsilon_max))

    return SceneSpec(
        resolution=config.resolution,
        duration=config.duration,
        frame_rate=config.frame_rate,
        background=background,
        sprites=sprites,
        epsilon=epsilon,
        offset=config.offset,
        seed=seed,
    )


def generate_sequence(spec: SceneSpec, name: str = "sequence") -> SceneSequence:
    """Render a scene and simulate its events."""
    sequence = render_sequence(spec)
    sequence.events = simulate_events(sequence.frames, sequence.frame_times, spec.epsilon, spec.offset)
    sequence.meta = SequenceMeta(
        name=name,
        resolution=spec.resolution,
        epsilon=spec.epsilon,
        offset=spec.offset,
        seed=spec.seed,
        frame_rate=spec.frame_rate,
        num_frames=sequence.num_frames,
        num_sprites=len(spec.sprites),
    )
    return sequence


def sequence_seeds(master_seed: int, count: int) -> list[int]:
    """Fan a master seed out into independent per-sequence seeds."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def generate_dataset(
    out_dir: Path,
    num_sequences: int,
    config: SceneConfig,
    seed: int,
    jobs: int = 1,
) -> list[Path]:
    """Write ``num_sequences`` sequences as ``seq_0000``, ``seq_0001``, ...

    Raises:
        DatasetError: If the output directory cannot be created.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DatasetError(
            f"Cannot create dataset directory: {e}",
            error_code=ErrorCode.DATASET_UNWRITABLE,
            details={"path": str(out_dir)},
        ) from e

    seeds = sequence_seeds(seed, num_sequences)
    names = [f"seq_{i:04d}" for i in range(num_sequences)]

    def _one(i: int) -> Path:
        spec = random_scene_spec(config, seeds[i])
        sequence = generate_sequence(spec, names[i])
        return write_sequence(sequence, out_dir / names[i])

    logger.info(f"Generating {num_sequences} sequences into {out_dir} (seed={seed}, jobs={jobs})")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        paths = list(
            tqdm(pool.map(_one, range(num_sequences)), total=num_sequences, desc="simulate", unit="seq")
        )
    return paths
