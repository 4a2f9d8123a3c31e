"""Per-sequence training tensors and window batching.

Step ``k`` (``1 <= k < K``) pairs the voxel grid of events in
``[t_{k-1}, t_k)`` with frame ``k``, flow ``F_{k->k-1}`` and the teacher
bundle of frame ``k``. Windows are disjoint runs of ``seq_len`` steps.
"""

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from src.core.events import build_voxel_grid, group_between_frames, stack_voxel_grids
from src.core.semantics.teacher.cache import TeacherCache
from src.core.synth.dataset import load_sequence
from src.utils.exceptions import DatasetError, TeacherCacheError

logger = logging.getLogger(__name__)


@dataclass
class SequenceTensors:
    """Float32 tensors of one sequence, indexed by step ``k - 1``."""

    name: str
    voxels: torch.Tensor
    frames: torch.Tensor
    prev_frames: torch.Tensor
    flows: torch.Tensor
    teacher_features: torch.Tensor
    teacher_masks: torch.Tensor

    @property
    def num_steps(self) -> int:
        return int(self.voxels.shape[0])

    def window_starts(self, seq_len: int) -> list[int]:
        return [w * seq_len for w in range(self.num_steps // seq_len)]


@dataclass
class WindowBatch:
    """``(N, T, ...)`` tensors of ``N`` windows with ``T`` steps each."""

    voxels: torch.Tensor
    frames: torch.Tensor
    prev_frames: torch.Tensor
    flows: torch.Tensor
    teacher_features: torch.Tensor
    teacher_masks: torch.Tensor
    keys: list[tuple[str, int]]

    @property
    def seq_len(self) -> int:
        return int(self.voxels.shape[1])


def load_sequence_tensors(
    seq_dir: Path,
    cache: TeacherCache,
    num_bins: int,
    num_masks: int,
    feature_shape: tuple[int, int, int],
) -> SequenceTensors:
    """Build the training tensors of one sequence.

    Raises:
        DatasetError: If the sequence cannot be read.
        TeacherCacheError: If a teacher entry is missing or mismatched.
    """
    sequence = load_sequence(seq_dir, with_masks=False)
    groups = group_between_frames(sequence.events, sequence.frame_times)
    voxels = stack_voxel_grids([build_voxel_grid(g, num_bins, sequence.resolution) for g in groups])
    bundles = cache.load_sequence(seq_dir.name, sequence.num_frames, num_masks, feature_shape)

    frames = torch.from_numpy(sequence.frames.astype(np.float32))[:, None]
    return SequenceTensors(
        name=seq_dir.name,
        voxels=torch.from_numpy(voxels),
        frames=frames[1:],
        prev_frames=frames[:-1],
        flows=torch.from_numpy(sequence.flows.astype(np.float32)),
        teacher_features=torch.from_numpy(np.stack([b.feature for b in bundles[1:]]).astype(np.float32)),
        teacher_masks=torch.from_numpy(np.stack([b.masks for b in bundles[1:]]).astype(np.float32)),
    )


def load_training_set(
    seq_dirs: Sequence[Path],
    cache: TeacherCache,
    num_bins: int,
    num_masks: int,
    feature_shape: tuple[int, int, int],
    on_skip=None,
) -> list[SequenceTensors]:
    """Load every usable sequence; sequences with missing data are skipped with a warning."""
    loaded = []
    for seq_dir in seq_dirs:
        try:
            loaded.append(load_sequence_tensors(Path(seq_dir), cache, num_bins, num_masks, feature_shape))
        except (DatasetError, TeacherCacheError) as e:
            logger.warning(f"Skipping sequence {Path(seq_dir).name}: {e.message}")
            if on_skip is not None:
                on_skip()
    return loaded


def _window_batch(sequences: Sequence[SequenceTensors], chosen: list[tuple[int, int]], seq_len: int) -> WindowBatch:
    def take(attr: str) -> torch.Tensor:
        return torch.stack([getattr(sequences[i], attr)[s : s + seq_len] for i, s in chosen])

    return WindowBatch(
        voxels=take("voxels"),
        frames=take("frames"),
        prev_frames=take("prev_frames"),
        flows=take("flows"),
        teacher_features=take("teacher_features"),
        teacher_masks=take("teacher_masks"),
        keys=[(sequences[i].name, s) for i, s in chosen],
    )


def iterate_batches(
    sequences: Sequence[SequenceTensors],
    seq_len: int,
    batch_size: int,
    rng: np.random.Generator,
    sequential: bool = False,
) -> Iterator[WindowBatch]:
    """Yield window batches in an order drawn from ``rng``.

    By default all windows are shuffled together. With ``sequential`` the
    sequences are shuffled and split into groups of ``batch_size``; each group
    then walks its sequences window by window, so batch slot ``b`` of one batch
    continues slot ``b`` of the previous one until a sequence runs out.
    """
    if not sequential:
        keys = [(i, s) for i, seq in enumerate(sequences) for s in seq.window_starts(seq_len)]
        order = rng.permutation(len(keys))
        for b in range(0, len(order), batch_size):
            yield _window_batch(sequences, [keys[j] for j in order[b : b + batch_size]], seq_len)
        return

    usable = [i for i, seq in enumerate(sequences) if seq.window_starts(seq_len)]
    order = [usable[j] for j in rng.permutation(len(usable))]
    for g in range(0, len(order), batch_size):
        group = order[g : g + batch_size]
        starts = [sequences[i].window_starts(seq_len) for i in group]
        for w in range(max(len(s) for s in starts)):
            chosen = [(i, s[w]) for i, s in zip(group, starts, strict=True) if w < len(s)]
            yield _window_batch(sequences, chosen, seq_len)
