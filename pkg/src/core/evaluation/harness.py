"""Standard evaluation and robustness sweeps.

A sequence is scored by grouping its events, running the recurrent
reconstructor over the groups and comparing every reconstruction with the
nearest ground-truth frame within the time tolerance. Unmatched
reconstructions are counted as skipped.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np
import pandas as pd
from tqdm import tqdm

from src.core.evaluation.config import EvalConfig, SweepAxis
from src.core.evaluation.matching import match_nearest_frame
from src.core.evaluation.metrics import PROXY_LPIPS, mse, perceptual_distance, ssim
from src.core.evaluation.reconstructor import Reconstructor
from src.core.events import (
    EventStream,
    group_between_frames,
    group_fixed_count,
    group_fixed_duration,
)
from src.core.losses import PerceptualExtractor
from src.core.net import E2VNet, load_checkpoint
from src.core.synth.dataset import list_sequences, load_sequence
from src.core.synth.models import SceneSequence
from src.utils.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["mse", "ssim", PROXY_LPIPS]
REPORT_COLUMNS = ["sequence", *METRIC_COLUMNS, "matched", "skipped"]
CURVE_COLUMNS = ["setting", *METRIC_COLUMNS, "matched", "skipped"]

Grouper = Callable[[SceneSequence], list[EventStream]]


@dataclass
class EvalReport:
    """Per-sequence scores, their aggregate and any robustness curves."""

    per_sequence: pd.DataFrame
    curves: dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def aggregate(self) -> dict[str, float]:
        return aggregate_scores(self.per_sequence)


def aggregate_scores(per_sequence: pd.DataFrame) -> dict[str, float]:
    """Means over sequences with at least one match plus total match counts."""
    scored = per_sequence[per_sequence["matched"] > 0]
    result = {col: float(scored[col].mean()) if len(scored) else math.nan for col in METRIC_COLUMNS}
    result["matched"] = int(per_sequence["matched"].sum())
    result["skipped"] = int(per_sequence["skipped"].sum())
    result["sequences"] = int(len(scored))
    return result


def between_frames(config: EvalConfig, discard_ratio: float = 0.0) -> Grouper:
    def grouper(sequence: SceneSequence) -> list[EventStream]:
        seed = config.sequence_discard_seed(sequence.meta.name)
        return group_between_frames(sequence.events, sequence.frame_times, discard_ratio, seed)

    return grouper


def fixed_count(count: int) -> Grouper:
    return lambda sequence: group_fixed_count(sequence.events, count)


def fixed_duration(dt: float) -> Grouper:
    return lambda sequence: group_fixed_duration(
        sequence.events, dt, t0=float(sequence.frame_times[0]), t_end=float(sequence.frame_times[-1])
    )


def grouper_for(axis: SweepAxis | str, setting: float, config: EvalConfig) -> Grouper:
    axis = SweepAxis.parse(axis)
    if axis is SweepAxis.SPARSITY:
        return fixed_count(int(setting))
    if axis is SweepAxis.RATE:
        return fixed_duration(float(setting))
    return between_frames(config, float(setting))


def score_sequence(
    model: E2VNet,
    sequence: SceneSequence,
    grouper: Grouper,
    extractor: PerceptualExtractor,
    tolerance: float,
) -> dict[str, float]:
    """Reconstruct one sequence and score every matched reconstruction."""
    reconstructions = Reconstructor(model).run(grouper(sequence), sequence.resolution)
    scores: dict[str, list[float]] = {col: [] for col in METRIC_COLUMNS}
    skipped = 0
    for rec in reconstructions:
        idx = match_nearest_frame(rec.time, sequence.frame_times, tolerance)
        if idx is None:
            skipped += 1
            continue
        gt = sequence.frames[idx]
        scores["mse"].append(mse(rec.frame, gt))
        scores["ssim"].append(ssim(rec.frame, gt))
        scores[PROXY_LPIPS].append(perceptual_distance(rec.frame, gt, extractor))

    matched = len(scores["mse"])
    row: dict[str, float] = {
        col: float(np.mean(vals)) if vals else math.nan for col, vals in scores.items()
    }
    row.update(sequence=sequence.meta.name, matched=matched, skipped=skipped)
    return row


def evaluate_sequences(
    model: E2VNet,
    sequences: Sequence[SceneSequence],
    grouper: Grouper,
    config: EvalConfig,
    jobs: int = 1,
    desc: str = "evaluate",
) -> pd.DataFrame:
    """Score ``sequences`` in parallel; rows come back sorted by sequence name."""
    extractor = PerceptualExtractor(seed=config.perceptual_seed).double()

    def _one(sequence: SceneSequence) -> dict[str, float]:
        return score_sequence(model, sequence, grouper, extractor, config.tolerance)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(tqdm(pool.map(_one, sequences), total=len(sequences), desc=desc, leave=False))
    return pd.DataFrame(rows, columns=REPORT_COLUMNS).sort_values("sequence").reset_index(drop=True)


def load_eval_sequences(seq_dirs: Sequence[Path]) -> list[SceneSequence]:
    return [load_sequence(Path(d), with_masks=False) for d in seq_dirs]


def write_report(report: EvalReport, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.per_sequence.to_csv(out_dir / "report.csv", index=False)
    pd.DataFrame([report.aggregate]).to_csv(out_dir / "aggregate.csv", index=False)


def evaluate_model(
    model: E2VNet,
    seq_dirs: Sequence[Path],
    config: EvalConfig | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Standard evaluation: one reconstruction per interval between consecutive frames."""
    config = config or EvalConfig()
    sequences = load_eval_sequences(seq_dirs)
    return EvalReport(per_sequence=evaluate_sequences(model, sequences, between_frames(config), config, jobs))


def evaluate_checkpoint(
    checkpoint: Path,
    dataset_dir: Path,
    out_dir: Path | None = None,
    config: EvalConfig | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Evaluate a checkpoint on every sequence of a dataset and write ``report.csv``/``aggregate.csv``."""
    model, metadata = load_checkpoint(checkpoint)
    logger.info(f"Evaluating {checkpoint} (epoch={metadata.get('epoch')}, ablation={metadata.get('ablation')})")
    report = evaluate_model(model, list_sequences(dataset_dir), config, jobs)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def robustness_sweep(
    model: E2VNet,
    seq_dirs: Sequence[Path],
    axis: SweepAxis | str,
    settings: Sequence[float] | None = None,
    config: EvalConfig | None = None,
    out_dir: Path | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Evaluate under each grouping setting of one axis.

    A setting without any matched reconstruction is kept as a missing (NaN)
    point. The per-sequence table of the report is the one of the first setting.
    """
    axis = SweepAxis.parse(axis)
    config = config or EvalConfig()
    settings = list(settings) if settings is not None else config.default_settings(axis)
    if not settings:
        raise InvalidArgumentError(f"No settings for the {axis.value} sweep", argument="settings")
    if axis is SweepAxis.IRREGULARITY and any(not 0.0 <= s <= 1.0 for s in settings):
        raise InvalidArgumentError(
            "Discard ratios must lie in [0, 1]", argument="settings"
        )

    sequences = load_eval_sequences(seq_dirs)
    points = []
    first: pd.DataFrame | None = None
    for setting in settings:
        per_sequence = evaluate_sequences(
            model, sequences, grouper_for(axis, setting, config), config, jobs, desc=f"{axis.value}={setting:g}"
        )
        first = per_sequence if first is None else first
        agg = aggregate_scores(per_sequence)
        if agg["matched"] == 0:
            logger.warning(f"No matched reconstruction at {axis.value}={setting:g}; recording a missing point")
        points.append({"setting": setting, **{k: agg[k] for k in CURVE_COLUMNS if k != "setting"}})

    curve = pd.DataFrame(points, columns=CURVE_COLUMNS)
    report = EvalReport(per_sequence=first, curves={axis.value: curve})
    if out_dir is not None:
        write_curve(curve, axis, Path(out_dir), config)
    return report


def write_curve(curve: pd.DataFrame, axis: SweepAxis, out_dir: Path, config: EvalConfig) -> tuple[Path, Path]:
    """Write ``curves_<axis>.csv`` and ``curves_<axis>.png``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"curves_{axis.value}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        if axis is SweepAxis.SPARSITY:
            f.write(f"# events per group rescaled by sparsity_scale={config.sparsity_scale:g} from 5000..45000\n")
        f.write(f"# {PROXY_LPIPS} is a frozen random-feature distance, not LPIPS\n")
        curve.to_csv(f, index=False)

    png_path = out_dir / f"curves_{axis.value}.png"
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, metric in zip(axes, ("mse", "ssim"), strict=True):
        ax.plot(curve["setting"], curve[metric], marker="o")
        ax.set_xlabel(axis.value)
        ax.set_ylabel(metric.upper())
        ax.grid(True, alpha=0.3)
    fig.suptitle(f"Robustness: {axis.value}")
    fig.tight_layout()
    fig.savefig(png_path)
    plt.close(fig)
    return csv_path, png_path


def read_curve(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")
