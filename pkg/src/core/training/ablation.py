"""Ablation suite: train variants over several seeds and compare them on held-out sequences."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pandas as pd

from src.core.evaluation import EvalConfig, evaluate_model
from src.core.losses import LossWeights
from src.core.net import ModelConfig
from src.core.synth.dataset import list_sequences
from src.core.training.config import Ablation, TrainConfig
from src.core.training.trainer import Trainer
from src.utils.exceptions import DatasetError, ErrorCode, InvalidArgumentError

logger = logging.getLogger(__name__)

GRID_KEYS = ("ablation", "lambda", "num_masks")
REFERENCE = {"ablation": Ablation.FULL.value, "lambda": 1.8, "num_masks": 10}
WIN_SHARE = 0.8


@dataclass(frozen=True)
class AblationGrid:
    """One swept knob and its values, e.g. ``lambda=0.5,1.0,1.8``."""

    key: str
    values: tuple[Any, ...]

    @property
    def reference(self) -> Any:
        ref = REFERENCE[self.key]
        return ref if ref in self.values else self.values[0]

    def label(self, value: Any) -> str:
        return f"{self.key}={value}"


def parse_grid(text: str) -> AblationGrid:
    """Parse ``key=v1,v2,...``.

    Raises:
        InvalidArgumentError: On an unknown key, a bad value or fewer than two values.
    """
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or key not in GRID_KEYS:
        raise InvalidArgumentError(
            f"Grid must look like key=v1,v2 with key in {', '.join(GRID_KEYS)}; got {text!r}", argument="grid"
        )
    items = [v.strip() for v in raw.split(",") if v.strip()]
    try:
        if key == "ablation":
            values = tuple(Ablation(v).value for v in items)
        elif key == "lambda":
            values = tuple(float(v) for v in items)
        else:
            values = tuple(int(v) for v in items)
    except ValueError as e:
        raise InvalidArgumentError(f"Bad value in grid {text!r}: {e}", argument="grid") from e
    if len(set(values)) < 2:
        raise InvalidArgumentError("An ablation grid needs at least two distinct values", argument="grid")
    return AblationGrid(key=key, values=values)


def split_heldout(seq_dirs: Sequence[Path], fraction: float) -> tuple[list[Path], list[Path]]:
    """Hold out the last ``max(1, round(fraction * n))`` sequences by name."""
    ordered = sorted((Path(d) for d in seq_dirs), key=lambda p: p.name)
    if len(ordered) < 2:
        raise DatasetError(
            f"Need at least two sequences for a held-out split, got {len(ordered)}",
            error_code=ErrorCode.DATASET_INVALID_LAYOUT,
        )
    n_heldout = min(len(ordered) - 1, max(1, round(fraction * len(ordered))))
    return ordered[:-n_heldout], ordered[-n_heldout:]


def variant_configs(
    grid: AblationGrid,
    value: Any,
    train_config: TrainConfig,
    loss_weights: LossWeights,
    seed: int,
) -> tuple[TrainConfig, LossWeights]:
    overrides: dict[str, Any] = {"seed": seed}
    weights = loss_weights
    if grid.key == "ablation":
        overrides["ablation"] = value
    elif grid.key == "num_masks":
        overrides["num_masks"] = value
    else:
        weights = LossWeights(**{**loss_weights.model_dump(), "lambda_distill": value})
    return TrainConfig(**{**train_config.model_dump(), **overrides}), weights


@dataclass
class AblationReport:
    table: pd.DataFrame
    summary: pd.DataFrame

    @property
    def passed(self) -> bool:
        return bool(self.summary["passed"].all())


def compare_to_reference(table: pd.DataFrame, reference: str) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Add signed per-seed deltas against the reference variant and summarise wins.

    The reference wins a seed when its MSE is not above the variant's; a variant
    passes when the reference wins at least ``ceil(0.8 * seeds)`` seeds.
    """
    ref = table[table["variant"] == reference].set_index("seed")
    table = table.copy()
    table["delta_mse"] = table["mse"] - table["seed"].map(ref["mse"])
    table["delta_ssim"] = table["ssim"] - table["seed"].map(ref["ssim"])

    rows = []
    for variant, group in table[table["variant"] != reference].groupby("variant", sort=False):
        seeds = len(group)
        wins = int((group["delta_mse"] >= 0).sum())
        required = math.ceil(WIN_SHARE * seeds)
        rows.append(
            {
                "variant": variant,
                "reference": reference,
                "seeds": seeds,
                "reference_wins": wins,
                "required": required,
                "median_mse": float(group["mse"].median()),
                "reference_median_mse": float(ref["mse"].median()),
                "passed": wins >= required,
            }
        )
    return table, pd.DataFrame(rows)


def run_ablation_suite(
    dataset_dir: Path,
    cache_root: Path,
    out_dir: Path,
    grid: AblationGrid,
    model_config: ModelConfig,
    train_config: TrainConfig,
    loss_weights: LossWeights | None = None,
    eval_config: EvalConfig | None = None,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    jobs: int = 1,
) -> AblationReport:
    """Train every grid value with every seed and score it on the held-out split.

    Writes ``ablation.csv`` (per-seed MSE/SSIM with deltas) and
    ``ablation_summary.csv`` under ``out_dir``.
    """
    loss_weights = loss_weights or LossWeights()
    out_dir = Path(out_dir)
    train_dirs, heldout_dirs = split_heldout(list_sequences(dataset_dir), train_config.heldout_fraction)
    logger.info(
        f"Ablation over {grid.key} {list(grid.values)} x seeds {list(seeds)}: "
        f"{len(train_dirs)} training / {len(heldout_dirs)} held-out sequences"
    )

    rows = []
    for value in grid.values:
        for seed in seeds:
            cfg, weights = variant_configs(grid, value, train_config, loss_weights, seed)
            run_dir = out_dir / grid.label(value) / f"seed_{seed}"
            result = Trainer(model_config, cfg, weights).fit(train_dirs, cache_root, run_dir)
            agg = evaluate_model(result.model, heldout_dirs, eval_config, jobs).aggregate
            logger.info(f"{grid.label(value)} seed={seed}: mse={agg['mse']:.5f} ssim={agg['ssim']:.4f}")
            rows.append({"variant": grid.label(value), "seed": seed, "mse": agg["mse"], "ssim": agg["ssim"]})

    table, summary = compare_to_reference(pd.DataFrame(rows), grid.label(grid.reference))
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / "ablation.csv", index=False)
    summary.to_csv(out_dir / "ablation_summary.csv", index=False)
    return AblationReport(table=table, summary=summary)
