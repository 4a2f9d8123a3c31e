"""Main CLI entry point for the 'e2v' command-line tool.

Command-line usage errors detected by the parser exit with code 1, like
configuration errors raised by the commands.
"""

import sys

import click

from src.cli import app
from src.utils.exceptions import ExitCode


def main() -> None:
    try:
        code = app(standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(ExitCode.USAGE)
    except click.exceptions.ClickException as e:
        e.show()
        sys.exit(ExitCode.USAGE)
    sys.exit(code if isinstance(code, int) else ExitCode.OK)


if __name__ == "__main__":
    main()
