import logging
import os
import sys
from typing import Optional

import click
from click.core import ParameterSource

from capteamcli.commands import commands_capteam
from capteamcli.utils.friendly_errors import EXIT_RUNTIME_ERROR, to_user_facing_error
from capteamcli.utils.logging import (
    LoggingConfig,
    apply_logging_policies,
    current_environment,
    setup_logging,
)
from capteamcli.utils.version_cli import (
    add_version_to_help_tree,
    show_version_and_exit,
    terminal_allows_color,
)


@click.group(context_settings=dict(help_option_names=["-h", "--help"]))
@click.option(
    "--version",
    "-V",
    is_flag=True,
    is_eager=True,
    expose_value=False,
    callback=show_version_and_exit,
    help="Show the capteam-cli version and exit.",
)
@click.option(
    "--log-file",
    type=click.Path(dir_okay=False, writable=True, resolve_path=True),
    default=None,
    help="Write logs to a file. If set, disables color completely.",
)
@click.option(
    "--no-color",
    is_flag=True,
    default=False,
    help="Disable colored output in the terminal.",
)
@click.option(
    "--log-level",
    type=click.Choice(
        ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False
    ),
    default="INFO",
    help="Logging level. ENVIRONMENT=prod raises the default to WARNING.",
)
@click.option(
    "-q",
    "--quiet",
    is_flag=True,
    default=False,
    help="Suppress routine output; warnings and errors still print.",
)
@click.pass_context
def cli(
    ctx: click.Context,
    log_file: Optional[str],
    no_color: bool,
    log_level: str,
    quiet: bool,
) -> None:
    """Capability-aware policies for heterogeneous robot teams."""
    level = getattr(logging, log_level.upper(), logging.INFO)
    level = apply_logging_policies(
        level,
        quiet=quiet,
        environment=current_environment(),
        explicit_log_level=ctx.get_parameter_source("log_level")
        == ParameterSource.COMMANDLINE,
    )

    setup_logging(
        LoggingConfig(
            level=level,
            log_file=log_file,
            color=terminal_allows_color(no_color, log_file),
        )
    )


cli.add_command(commands_capteam.train_cmd)
cli.add_command(commands_capteam.eval_cmd)
cli.add_command(commands_capteam.selftest_cmd)
add_version_to_help_tree(cli)

DEBUG_ENV_VAR = "CAPTEAM_CLI_DEBUG"


def _debug_requested() -> bool:
    # The env var covers failures raised before the group callback sets up logging.
    flag = os.getenv(DEBUG_ENV_VAR, "").strip().lower()
    return flag in {"1", "true", "yes", "on"} or logging.getLogger().isEnabledFor(
        logging.DEBUG
    )


def main() -> None:
    """Run the CLI, mapping known failures to a message, a hint and an exit code.

    Set ``CAPTEAM_CLI_DEBUG=1`` or pass ``--log-level DEBUG`` to get the
    original traceback instead.
    """
    try:
        if len(sys.argv) == 1:
            cli.main(args=["--help"], prog_name="capteam-cli", standalone_mode=False)
            raise SystemExit(0)
        cli(standalone_mode=False)
    except SystemExit:
        raise
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        raise SystemExit(1)
    except click.ClickException as e:
        e.show()
        raise SystemExit(e.exit_code)
    except Exception as e:
        if _debug_requested():
            raise
        friendly_error = to_user_facing_error(e)
        if friendly_error is None:
            click.echo(f"Unexpected error: {type(e).__name__}: {e}", err=True)
            raise SystemExit(EXIT_RUNTIME_ERROR)
        logging.debug("Suppressed traceback for CLI exception", exc_info=e)
        friendly_error.show()
        raise SystemExit(friendly_error.exit_code)


if __name__ == "__main__":
    main()
