"""Sequence training loop."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import torch
from tqdm import tqdm

from src.core.losses import (
    LossParts,
    LossWeights,
    PerceptualExtractor,
    relational_distillation_loss,
    semantic_perceptual_loss,
    temporal_consistency_loss,
    total_loss,
)
from src.core.net import E2VNet, ModelConfig, RecurrentState, save_checkpoint
from src.core.semantics.teacher.cache import TeacherCache
from src.core.synth.dataset import read_meta
from src.core.training.config import TrainConfig, apply_ablation, split_seeds
from src.core.training.data import SequenceTensors, WindowBatch, iterate_batches, load_training_set
from src.observability.metrics import TrainingMetrics
from src.utils.exceptions import DatasetError, ErrorCode, NumericalError

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ["step", "semantic", "temporal", "distill", "total"]


@dataclass
class TrainResult:
    """Artifacts of a finished run."""

    checkpoint: Path
    loss_log: Path
    history: pd.DataFrame
    model: E2VNet
    trained_sequences: list[str] = field(default_factory=list)


class Trainer:
    """Train one model on a dataset with a complete teacher cache.

    Args:
        model_config: Topology before the ablation is applied.
        train_config: Protocol and ablation.
        loss_weights: ``lambda`` and ``alpha``.
        metrics: Optional metrics sink.
    """

    def __init__(
        self,
        model_config: ModelConfig,
        train_config: TrainConfig,
        loss_weights: LossWeights | None = None,
        metrics: TrainingMetrics | None = None,
    ):
        self.train_config = train_config
        self.loss_weights = loss_weights or LossWeights()
        self.model_config = apply_ablation(model_config, train_config.ablation)
        self.seeds = split_seeds(train_config.seed)
        self.metrics = metrics or TrainingMetrics(run=train_config.ablation.value)

        torch.manual_seed(self.seeds.init)
        self.model = E2VNet(self.model_config)
        self.extractor = PerceptualExtractor(seed=train_config.perceptual_seed)
        self.optimizer = torch.optim.Adam(self.model.parameters(), lr=train_config.learning_rate)
        self.global_step = 0
        self._carried: RecurrentState | None = None
        self._carried_keys: list[tuple[str, int]] = []
        self._stats: dict[str, Any] = {"windows": 0, "carried_windows": 0, "skipped_sequences": 0}

    @property
    def carried_state(self) -> RecurrentState | None:
        """Detached state at the end of the last window, or ``None`` before the first step."""
        return self._carried

    def _continues_last_window(self, keys: list[tuple[str, int]]) -> bool:
        seq_len = self.train_config.seq_len
        return len(keys) == len(self._carried_keys) and all(
            name == prev_name and start == prev_start + seq_len
            for (name, start), (prev_name, prev_start) in zip(keys, self._carried_keys, strict=True)
        )

    def window_losses(self, batch: WindowBatch) -> tuple[torch.Tensor, dict[str, float]]:
        """Unroll the model over a window and return the mean objective with per-term means."""
        cfg = self.train_config
        state = self.model.initial_state()
        if not cfg.reset_state_per_window and self._carried is not None and self._continues_last_window(batch.keys):
            state = self._carried
            self._stats["carried_windows"] += len(batch.keys)
        prev_rec: torch.Tensor | None = None
        totals = {"semantic": 0.0, "temporal": 0.0, "distill": 0.0}
        objective = batch.voxels.new_zeros(())

        for j in range(batch.seq_len):
            out = self.model(batch.voxels[:, j], state, prev_rec)
            gt = batch.frames[:, j]
            masks = batch.teacher_masks[:, j] if cfg.uses_masks else None
            student = out.f_e if cfg.distills_event_feature or out.f_semantic is None else out.f_semantic
            parts = LossParts(
                semantic=semantic_perceptual_loss(out.frame, gt, masks, self.extractor),
                distill=relational_distillation_loss(student, batch.teacher_features[:, j]),
            )
            if prev_rec is not None:
                parts.temporal = temporal_consistency_loss(
                    out.frame, prev_rec, gt, batch.prev_frames[:, j], batch.flows[:, j], self.loss_weights.alpha
                )
            objective = objective + total_loss(parts, self.loss_weights)
            for key, value in parts.as_floats().items():
                totals[key] += value
            state, prev_rec = out.state, out.frame

        self._carried = state.detach()
        self._carried_keys = list(batch.keys)
        steps = float(batch.seq_len)
        values = {k: v / steps for k, v in totals.items()}
        objective = objective / steps
        values["total"] = float(objective.detach())
        return objective, values

    def train_step(self, batch: WindowBatch) -> dict[str, float]:
        """One optimizer step on a window batch.

        Raises:
            NumericalError: If the objective or a gradient is not finite.
        """
        self.model.train()
        self.optimizer.zero_grad(set_to_none=True)
        with self.metrics.time_step() as record:
            objective, values = self.window_losses(batch)
            if not torch.isfinite(objective):
                raise NumericalError(
                    "Non-finite training loss",
                    step=self.global_step,
                    details={"losses": values, "windows": batch.keys},
                )
            objective.backward()
            grad_norm = torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.train_config.grad_clip)
            if not torch.isfinite(grad_norm):
                raise NumericalError(
                    "Non-finite gradient norm", step=self.global_step, details={"windows": batch.keys}
                )
            self.optimizer.step()
            record.update(values)
        self.global_step += 1
        self._stats["windows"] += batch.voxels.shape[0]
        return values

    def _skip(self) -> None:
        self._stats["skipped_sequences"] += 1
        self.metrics.record_skipped_sequence()

    def load(self, seq_dirs: list[Path], cache_root: Path) -> list[SequenceTensors]:
        if not seq_dirs:
            raise DatasetError("No sequences to train on", error_code=ErrorCode.DATASET_NOT_FOUND)
        resolution = read_meta(Path(seq_dirs[0]) / "meta.cfg").resolution
        sequences = load_training_set(
            seq_dirs,
            TeacherCache(cache_root),
            self.model_config.num_bins,
            self.train_config.num_masks,
            self.model_config.feature_shape(resolution),
            on_skip=self._skip,
        )
        if not sequences:
            raise DatasetError("No usable training sequence", error_code=ErrorCode.DATASET_NOT_FOUND)
        if not any(s.window_starts(self.train_config.seq_len) for s in sequences):
            raise DatasetError(
                f"No sequence is long enough for seq_len={self.train_config.seq_len}",
                error_code=ErrorCode.DATASET_INVALID_LAYOUT,
            )
        return sequences

    def fit(self, seq_dirs: list[Path], cache_root: Path, out_dir: Path) -> TrainResult:
        """Train on ``seq_dirs`` and write ``losses.csv`` and checkpoints under ``out_dir``."""
        cfg = self.train_config
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        sequences = self.load(seq_dirs, cache_root)
        rng = np.random.default_rng(self.seeds.data)
        rows: list[dict[str, float]] = []
        loss_log = out_dir / "losses.csv"

        logger.info(
            f"Training {cfg.ablation.value} on {len(sequences)} sequences for {cfg.epochs} epochs "
            f"(seq_len={cfg.seq_len}, batch={cfg.batch_size}, seed={cfg.seed})"
        )
        for epoch in range(1, cfg.epochs + 1):
            batches = iterate_batches(
                sequences, cfg.seq_len, cfg.batch_size, rng, sequential=not cfg.reset_state_per_window
            )
            for batch in tqdm(batches, desc=f"epoch {epoch}/{cfg.epochs}", unit="batch", leave=False):
                values = self.train_step(batch)
                rows.append({"step": self.global_step, **values})
            history = pd.DataFrame(rows, columns=LOSS_COLUMNS)
            history.to_csv(loss_log, index=False)
            if rows:
                logger.info(f"Epoch {epoch}: total={rows[-1]['total']:.5f} after step {self.global_step}")
            if cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0 and epoch < cfg.epochs:
                save_checkpoint(self.model, out_dir / "checkpoints" / f"epoch_{epoch:03d}.ckpt", self._metadata(epoch))

        final = save_checkpoint(self.model, out_dir / "final.ckpt", self._metadata(cfg.epochs))
        return TrainResult(
            checkpoint=final,
            loss_log=loss_log,
            history=pd.DataFrame(rows, columns=LOSS_COLUMNS),
            model=self.model,
            trained_sequences=[s.name for s in sequences],
        )

    def _metadata(self, epoch: int) -> dict[str, Any]:
        return {
            "epoch": epoch,
            "step": self.global_step,
            "seed": self.train_config.seed,
            "ablation": self.train_config.ablation.value,
            "lambda_distill": self.loss_weights.lambda_distill,
            "alpha": self.loss_weights.alpha,
            "num_masks": self.train_config.num_masks,
        }

    def get_stats(self) -> dict[str, Any]:
        return {**self._stats, "steps": self.global_step, "metrics": self.metrics.summary()}


def train(
    seq_dirs: list[Path],
    cache_root: Path,
    out_dir: Path,
    model_config: ModelConfig,
    train_config: TrainConfig,
    loss_weights: LossWeights | None = None,
) -> TrainResult:
    """Convenience wrapper: build a :class:`Trainer` and fit it."""
    return Trainer(model_config, train_config, loss_weights).fit(seq_dirs, cache_root, out_dir)
