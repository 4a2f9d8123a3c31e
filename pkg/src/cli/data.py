"""Data commands: synthetic dataset generation and teacher precompute."""

import logging
from typing import Annotated

import typer

from src.cli.common import (
    ConfigOption,
    DatasetOption,
    JobsOption,
    OutOption,
    SeedOption,
    SetOption,
    VerboseOption,
    command_errors,
    resolve_config,
    setup_logging,
)
from src.core.losses import stage0_size
from src.core.semantics.teacher import get_teacher, precompute_teacher
from src.core.synth.dataset import META_FILE, list_sequences, read_meta
from src.core.synth.generator import generate_dataset
from src.utils.exceptions import ErrorCode, TeacherCacheError

logger = logging.getLogger(__name__)


def simulate_command(
    out: OutOption,
    sequences: Annotated[int | None, typer.Option("--sequences", "-n", help="Number of sequences")] = None,
    resolution: Annotated[int | None, typer.Option("--resolution", help="Square frame size in pixels")] = None,
    seed: SeedOption = None,
    epsilon_range: Annotated[
        tuple[float, float] | None,
        typer.Option("--epsilon-range", help="Contrast threshold range: MIN MAX"),
    ] = None,
    jobs: JobsOption = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Render synthetic sequences and simulate their events."""
    setup_logging(verbose)
    with command_errors("simulate"):
        flags = {"sequences": sequences, "seed": seed, "jobs": jobs}
        if resolution is not None:
            flags.update(width=resolution, height=resolution)
        if epsilon_range is not None:
            flags.update(epsilon_min=epsilon_range[0], epsilon_max=epsilon_range[1])
        cfg = resolve_config(config, set_, flags)
        paths = generate_dataset(out, cfg.sequences, cfg.scene_config(), cfg.seed, cfg.jobs)
        cfg.write_resolved(out, header=[f"simulate --out {out}"])
        typer.echo(f"Wrote {len(paths)} sequences to {out}")


def teacher_command(
    dataset: DatasetOption,
    out: OutOption,
    n_masks: Annotated[int | None, typer.Option("--n-masks", help="Categorical masks per frame")] = None,
    seed: Annotated[int | None, typer.Option("--seed", help="Teacher feature seed")] = None,
    jobs: JobsOption = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Precompute teacher bundles for every frame; resumes an interrupted run."""
    setup_logging(verbose)
    with command_errors("teacher"):
        cfg = resolve_config(config, set_, {"teacher_masks": n_masks, "teacher_seed": seed, "jobs": jobs})
        seq_dirs = list_sequences(dataset)
        width, height = read_meta(seq_dirs[0] / META_FILE).resolution
        provider = get_teacher(
            cfg.teacher,
            feature_shape=cfg.net_config().feature_shape((width, height)),
            mask_size=stage0_size(height, width),
            num_masks=cfg.teacher_masks,
            seed=cfg.teacher_seed,
        )
        report = precompute_teacher(dataset, provider, out, cfg.jobs)
        cfg.write_resolved(out, header=[f"teacher --dataset {dataset} --out {out}"])
        typer.echo(f"Teacher cache at {out}: {report.computed} computed, {report.reused} reused")
        if report.failed:
            raise TeacherCacheError(
                f"{len(report.failed)} sequence(s) could not be cached",
                error_code=ErrorCode.TEACHER_CACHE_MISSING,
                details={"sequences": {s.sequence: s.error for s in report.failed}},
            )
