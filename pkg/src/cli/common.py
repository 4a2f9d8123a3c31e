"""Options, logging and error handling shared by every command."""

import logging
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from src.utils.exceptions import ErrorHandler
from src.utils.settings import RunConfig, parse_overrides

logger = logging.getLogger(__name__)

console = Console()

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

ConfigOption = Annotated[
    Path | None, typer.Option("--config", "-c", help="key=value config file (e.g. a resolved.cfg)")
]
SetOption = Annotated[
    list[str] | None, typer.Option("--set", help="Override one config key as key=value; repeatable")
]
OutOption = Annotated[Path, typer.Option("--out", "-o", help="Output directory")]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Enable verbose logging")]
JobsOption = Annotated[int | None, typer.Option("--jobs", "-j", help="Parallel sequence-level workers")]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Master seed (falls back to E2V_SEED)")]
DatasetOption = Annotated[Path, typer.Option("--dataset", "-d", help="Dataset directory")]
CheckpointOption = Annotated[Path, typer.Option("--checkpoint", help="Model checkpoint (E2VCKPT/1)")]
TeacherCacheOption = Annotated[Path, typer.Option("--teacher-cache", help="Teacher cache root")]


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT, force=True)


def resolve_config(
    config: Path | None,
    sets: list[str] | None,
    flags: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Merge ``--set`` items and explicit flags (flags win) over the config file."""
    overrides: dict[str, Any] = parse_overrides(sets)
    overrides.update({k: v for k, v in (flags or {}).items() if v is not None})
    return RunConfig.load(config, overrides)


@contextmanager
def command_errors(command: str) -> Iterator[None]:
    """Log failures and exit with the code of their error family."""
    try:
        yield
    except (typer.Exit, typer.Abort):
        raise
    except Exception as e:
        ErrorHandler.log_error(e, command=command)
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=int(ErrorHandler.exit_code_for(e))) from e


def print_table(title: str, frame: pd.DataFrame) -> None:
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column), justify="right" if pd.api.types.is_numeric_dtype(frame[column]) else "left")
    for row in frame.itertuples(index=False):
        table.add_row(*(f"{v:.5g}" if isinstance(v, float) else str(v) for v in row))
    console.print(table)
