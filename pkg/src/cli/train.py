"""Training commands: single runs and ablation suites."""

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
    TeacherCacheOption,
    VerboseOption,
    command_errors,
    print_table,
    resolve_config,
    setup_logging,
)
from src.core.synth.dataset import list_sequences
from src.core.training import Trainer, parse_grid, run_ablation_suite
from src.observability.metrics import TrainingMetrics

logger = logging.getLogger(__name__)


def train_command(
    dataset: DatasetOption,
    teacher_cache: TeacherCacheOption,
    out: OutOption,
    seed: SeedOption = None,
    epochs: Annotated[int | None, typer.Option("--epochs", help="Training epochs")] = None,
    seq_len: Annotated[int | None, typer.Option("--seq-len", help="Steps per training window")] = None,
    ablation: Annotated[str | None, typer.Option("--ablation", help="Variant to train")] = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Train a model on a dataset with a complete teacher cache."""
    setup_logging(verbose)
    with command_errors("train"):
        cfg = resolve_config(config, set_, {"seed": seed, "epochs": epochs, "seq_len": seq_len, "ablation": ablation})
        cfg.write_resolved(out, header=[f"train --dataset {dataset} --teacher-cache {teacher_cache} --out {out}"])
        metrics = TrainingMetrics(run=cfg.ablation.value)
        trainer = Trainer(cfg.net_config(), cfg.train_config(), cfg.loss_weights(), metrics)
        result = trainer.fit(list_sequences(dataset), teacher_cache, out)
        exported = metrics.export()
        if exported:
            (out / "metrics.prom").write_text(exported, encoding="utf-8")
        stats = trainer.get_stats()
        typer.echo(
            f"Trained {stats['steps']} steps on {len(result.trained_sequences)} sequences "
            f"({stats['skipped_sequences']} skipped); checkpoint: {result.checkpoint}"
        )


def ablate_command(
    dataset: DatasetOption,
    teacher_cache: TeacherCacheOption,
    out: OutOption,
    grid: Annotated[str, typer.Option("--grid", help="Swept key and values, e.g. lambda=0.5,1.0,1.8")],
    seeds: Annotated[int | None, typer.Option("--seeds", help="Seeds per variant")] = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Train every grid value over several seeds and compare on held-out sequences."""
    setup_logging(verbose)
    with command_errors("ablate"):
        cfg = resolve_config(config, set_, {"ablation_seeds": seeds, "seed": seed, "jobs": jobs})
        ablation_grid = parse_grid(grid)
        cfg.write_resolved(
            out, header=[f"ablate --dataset {dataset} --teacher-cache {teacher_cache} --out {out} --grid {grid}"]
        )
        report = run_ablation_suite(
            dataset,
            teacher_cache,
            out,
            ablation_grid,
            cfg.net_config(),
            cfg.train_config(),
            cfg.loss_weights(),
            cfg.eval_config(),
            seeds=cfg.ablation_seed_list(),
            jobs=cfg.jobs,
        )
        print_table("Per-seed results", report.table)
        print_table("Reference wins", report.summary)
        typer.echo("Ablation direction: " + ("PASS" if report.passed else "FAIL"))
