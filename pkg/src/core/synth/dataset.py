"""On-disk layout of a generated sequence.

::

    <seq>/frames/%06d.pgm        8-bit frames
    <seq>/flow/%06d.flo2         F_{k->k-1} for k >= 1, (H, W, 2) little-endian f32
    <seq>/masks/%06d_s%02d.pbm   per-sprite visibility masks
    <seq>/events.evb1            event stream
    <seq>/timestamps.txt         frame times in seconds
    <seq>/meta.cfg               key=value facts
"""

import logging
from pathlib import Path

import numpy as np
from dotenv import dotenv_values
from PIL import Image

from src.core.events.io import read_events, write_events
from src.core.synth.models import SceneSequence, SequenceMeta
from src.utils.exceptions import DatasetError, ErrorCode, E2VException

logger = logging.getLogger(__name__)

FRAMES_DIR = "frames"
FLOW_DIR = "flow"
MASKS_DIR = "masks"
EVENTS_FILE = "events.evb1"
TIMES_FILE = "timestamps.txt"
META_FILE = "meta.cfg"


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_pgm(image: np.ndarray, path: Path) -> None:
    """Save a ``[0, 1]`` image as an 8-bit PGM."""
    Image.fromarray(to_uint8(image)).save(path)


def read_pgm(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.float64) / 255.0


def write_meta(meta: SequenceMeta, path: Path) -> None:
    width, height = meta.resolution
    lines = [
        f"name={meta.name}",
        f"width={width}",
        f"height={height}",
        f"epsilon={meta.epsilon!r}",
        f"offset={meta.offset!r}",
        f"seed={meta.seed}",
        f"frame_rate={meta.frame_rate!r}",
        f"num_frames={meta.num_frames}",
        f"num_sprites={meta.num_sprites}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_meta(path: Path) -> SequenceMeta:
    """Parse ``meta.cfg``.

    Raises:
        DatasetError: If the file is missing or lacks a key.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(
            f"Missing {path.name}", error_code=ErrorCode.DATASET_NOT_FOUND, sequence=path.parent.name
        )
    values = dotenv_values(path)
    try:
        return SequenceMeta(
            name=str(values["name"]),
            resolution=(int(values["width"]), int(values["height"])),
            epsilon=float(values["epsilon"]),
            offset=float(values["offset"]),
            seed=int(values["seed"]),
            frame_rate=float(values["frame_rate"]),
            num_frames=int(values["num_frames"]),
            num_sprites=int(values["num_sprites"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DatasetError(f"Malformed {path.name}: {e}", sequence=path.parent.name) from e


def write_sequence(sequence: SceneSequence, directory: Path) -> Path:
    """Write a rendered and simulated sequence.

    Raises:
        DatasetError: If the sequence has no events or metadata, or the
            directory cannot be written.
    """
    directory = Path(directory)
    if sequence.events is None or sequence.meta is None:
        raise DatasetError("Sequence must be simulated before it is written", sequence=directory.name)
    try:
        for sub in (FRAMES_DIR, FLOW_DIR, MASKS_DIR):
            (directory / sub).mkdir(parents=True, exist_ok=True)
        for k, frame in enumerate(sequence.frames):
            write_pgm(frame, directory / FRAMES_DIR / f"{k:06d}.pgm")
            for s in range(sequence.masks.shape[1]):
                Image.fromarray(sequence.masks[k, s]).save(directory / MASKS_DIR / f"{k:06d}_s{s:02d}.pbm")
        for k in range(1, sequence.num_frames):
            flow = np.ascontiguousarray(np.transpose(sequence.flows[k - 1], (1, 2, 0)), dtype="<f4")
            (directory / FLOW_DIR / f"{k:06d}.flo2").write_bytes(flow.tobytes())
        write_events(sequence.events, directory / EVENTS_FILE)
        np.savetxt(directory / TIMES_FILE, sequence.frame_times, fmt="%.9f")
        write_meta(sequence.meta, directory / META_FILE)
    except OSError as e:
        raise DatasetError(
            f"Cannot write sequence: {e}", error_code=ErrorCode.DATASET_UNWRITABLE, sequence=directory.name
        ) from e
    logger.debug(f"Wrote {directory} ({sequence.num_frames} frames, {len(sequence.events)} events)")
    return directory


def load_frames(directory: Path, num_frames: int) -> np.ndarray:
    directory = Path(directory)
    paths = [directory / FRAMES_DIR / f"{k:06d}.pgm" for k in range(num_frames)]
    missing = [p.name for p in paths if not p.is_file()]
    if missing:
        raise DatasetError(
            f"{len(missing)} frame file(s) missing",
            error_code=ErrorCode.DATASET_NOT_FOUND,
            sequence=directory.name,
            details={"missing": missing[:10]},
        )
    return np.stack([read_pgm(p) for p in paths])


def load_sequence(directory: Path, with_masks: bool = True) -> SceneSequence:
    """Read a sequence directory back into memory.

    Raises:
        DatasetError: On a missing file or inconsistent layout.
    """
    directory = Path(directory)
    meta = read_meta(directory / META_FILE)
    width, height = meta.resolution
    frames = load_frames(directory, meta.num_frames)

    flows = np.zeros((meta.num_frames - 1, 2, height, width), dtype=np.float32)
    for k in range(1, meta.num_frames):
        path = directory / FLOW_DIR / f"{k:06d}.flo2"
        try:
            raw = np.frombuffer(path.read_bytes(), dtype="<f4")
            flows[k - 1] = np.transpose(raw.reshape(height, width, 2), (2, 0, 1))
        except (OSError, ValueError) as e:
            raise DatasetError(f"Bad flow file {path.name}: {e}", sequence=directory.name) from e

    masks = np.zeros((meta.num_frames, meta.num_sprites, height, width), dtype=bool)
    if with_masks:
        for k in range(meta.num_frames):
            for s in range(meta.num_sprites):
                path = directory / MASKS_DIR / f"{k:06d}_s{s:02d}.pbm"
                try:
                    with Image.open(path) as img:
                        masks[k, s] = np.asarray(img.convert("1"), dtype=bool)
                except OSError as e:
                    raise DatasetError(f"Bad mask file {path.name}: {e}", sequence=directory.name) from e

    try:
        events = read_events(directory / EVENTS_FILE)
    except E2VException as e:
        raise DatasetError(f"Unreadable events: {e.message}", sequence=directory.name) from e
    times = np.loadtxt(directory / TIMES_FILE, dtype=np.float64, ndmin=1)
    if times.size != meta.num_frames:
        raise DatasetError(
            f"{times.size} timestamps for {meta.num_frames} frames", sequence=directory.name
        )
    return SceneSequence(frames=frames, flows=flows, masks=masks, frame_times=times, events=events, meta=meta)


def list_sequences(dataset_dir: Path) -> list[Path]:
    """Sequence directories of a dataset, sorted by name.

    Raises:
        DatasetError: If the dataset directory does not exist or holds no sequence.
    """
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise DatasetError(
            f"Dataset directory not found: {dataset_dir}", error_code=ErrorCode.DATASET_NOT_FOUND
        )
    found = sorted(p for p in dataset_dir.iterdir() if (p / META_FILE).is_file())
    if not found:
        raise DatasetError(f"No sequences under {dataset_dir}", error_code=ErrorCode.DATASET_NOT_FOUND)
    return found
