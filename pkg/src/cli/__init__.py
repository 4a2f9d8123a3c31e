"""e2v command-line entrypoint.

Commands are registered flat on one app:
simulate | teacher | train | reconstruct | evaluate | robustness | ablate.
Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.
"""

import typer

from src.cli.data import simulate_command, teacher_command
from src.cli.evaluate import evaluate_command, reconstruct_command, robustness_command
from src.cli.train import ablate_command, train_command

app = typer.Typer(help="Semantic-aware event-to-video reconstruction", add_completion=False, no_args_is_help=True)

app.command("simulate")(simulate_command)
app.command("teacher")(teacher_command)
app.command("train")(train_command)
app.command("reconstruct")(reconstruct_command)
app.command("evaluate")(evaluate_command)
app.command("robustness")(robustness_command)
app.command("ablate")(ablate_command)

__all__ = ["app"]
