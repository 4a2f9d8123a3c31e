"""Inference commands: reconstruction, evaluation and robustness sweeps."""

import logging
from pathlib import Path
from typing import Annotated

import numpy as np
import pandas as pd
import typer

from src.cli.common import (
    CheckpointOption,
    ConfigOption,
    DatasetOption,
    JobsOption,
    OutOption,
    SetOption,
    VerboseOption,
    command_errors,
    print_table,
    resolve_config,
    setup_logging,
)
from src.core.evaluation import Reconstructor, SweepAxis, evaluate_checkpoint, robustness_sweep
from src.core.events import group_events, read_events
from src.core.net import load_checkpoint
from src.core.synth.dataset import list_sequences, write_pgm
from src.utils.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

ToleranceOption = Annotated[
    float | None, typer.Option("--tolerance", help="Frame matching tolerance in seconds")
]


def _parse_settings(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise InvalidArgumentError(f"Settings must be comma-separated numbers, got {text!r}", argument="settings") from e


def reconstruct_command(
    checkpoint: CheckpointOption,
    events: Annotated[Path, typer.Option("--events", help="Event file (.evb1 or .csv)")],
    out: OutOption,
    grouping: Annotated[str, typer.Option("--grouping", help="duration | count | frames")] = "duration",
    dt: Annotated[float | None, typer.Option("--dt", help="Window duration in seconds")] = None,
    count: Annotated[int | None, typer.Option("--count", help="Events per group")] = None,
    timestamps: Annotated[
        Path | None, typer.Option("--timestamps", help="Frame times file for frame grouping")
    ] = None,
    resolution: Annotated[
        int | None, typer.Option("--resolution", help="Square sensor size for CSV events")
    ] = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Reconstruct a PGM frame sequence from an event file."""
    setup_logging(verbose)
    with command_errors("reconstruct"):
        cfg = resolve_config(config, set_)
        model, _ = load_checkpoint(checkpoint)
        stream = read_events(events, (resolution, resolution) if resolution else None)
        frame_times = np.loadtxt(timestamps, dtype=np.float64, ndmin=1) if timestamps is not None else None
        groups = group_events(stream, grouping, count=count, dt=dt, frame_times=frame_times)

        reconstructions = Reconstructor(model).run(groups, stream.resolution)
        out.mkdir(parents=True, exist_ok=True)
        for i, rec in enumerate(reconstructions):
            write_pgm(rec.frame, out / f"{i:06d}.pgm")
        np.savetxt(out / "timestamps.txt", [r.time for r in reconstructions], fmt="%.9f")
        cfg.write_resolved(out, header=[f"reconstruct --checkpoint {checkpoint} --events {events} --grouping {grouping}"])
        typer.echo(f"Wrote {len(reconstructions)} frames to {out}")


def evaluate_command(
    checkpoint: CheckpointOption,
    dataset: DatasetOption,
    out: OutOption,
    tolerance: ToleranceOption = None,
    jobs: JobsOption = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Score a checkpoint with one reconstruction per frame interval."""
    setup_logging(verbose)
    with command_errors("evaluate"):
        cfg = resolve_config(config, set_, {"tolerance": tolerance, "jobs": jobs})
        report = evaluate_checkpoint(checkpoint, dataset, out, cfg.eval_config(), cfg.jobs)
        cfg.write_resolved(out, header=[f"evaluate --checkpoint {checkpoint} --dataset {dataset}"])
        print_table("Per-sequence scores", report.per_sequence)
        print_table("Aggregate", pd.DataFrame([report.aggregate]))


def robustness_command(
    checkpoint: CheckpointOption,
    dataset: DatasetOption,
    out: OutOption,
    axis: Annotated[str, typer.Option("--axis", help="sparsity | rate | irregularity")],
    settings: Annotated[
        str | None, typer.Option("--settings", help="Comma-separated settings; defaults to the axis grid")
    ] = None,
    tolerance: ToleranceOption = None,
    jobs: JobsOption = None,
    config: ConfigOption = None,
    set_: SetOption = None,
    verbose: VerboseOption = False,
):
    """Sweep one robustness axis and write its curve files."""
    setup_logging(verbose)
    with command_errors("robustness"):
        cfg = resolve_config(config, set_, {"tolerance": tolerance, "jobs": jobs})
        sweep_axis = SweepAxis.parse(axis)
        model, _ = load_checkpoint(checkpoint)
        report = robustness_sweep(
            model,
            list_sequences(dataset),
            sweep_axis,
            _parse_settings(settings),
            cfg.eval_config(),
            out,
            cfg.jobs,
        )
        cfg.write_resolved(out, header=[f"robustness --checkpoint {checkpoint} --dataset {dataset} --axis {axis}"])
        print_table(f"Robustness: {sweep_axis.value}", report.curves[sweep_axis.value])
