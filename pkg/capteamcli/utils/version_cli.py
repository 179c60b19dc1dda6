from __future__ import annotations

import sys
from typing import Optional

import click

from capteamcli.utils import colors
from capteamcli.utils.version import get_capteam_cli_version


def terminal_allows_color(no_color: bool, log_file: Optional[str]) -> bool:
    """Color only for an interactive stdout, without --no-color or --log-file."""
    return sys.stdout.isatty() and (not no_color) and (not log_file)


def show_version_and_exit(
    ctx: click.Context, _param: click.Parameter, value: bool
) -> None:
    if not value or ctx.resilient_parsing:
        return
    colors.set_enabled(
        terminal_allows_color(
            no_color=bool(ctx.params.get("no_color")),
            log_file=ctx.params.get("log_file"),
        )
    )
    click.echo(
        f"capteam-cli version {colors.c(get_capteam_cli_version(), 'cyan', bright=True)}"
    )
    ctx.exit()


def add_version_to_help_tree(command: click.Command) -> None:
    """Prefix every help page in the tree with a ``Version:`` line."""
    stack = [command]
    seen: set = set()
    while stack:
        cmd = stack.pop()
        if id(cmd) in seen:
            continue
        seen.add(id(cmd))
        _wrap_get_help(cmd)
        if isinstance(cmd, click.Group):
            stack.extend(cmd.commands.values())


def _wrap_get_help(command: click.Command) -> None:
    original_get_help = command.get_help

    def get_help_with_version(ctx: click.Context) -> str:
        text = original_get_help(ctx)
        line = f"Version: {get_capteam_cli_version()}"
        lines = text.splitlines()
        if not lines or line in lines:
            return text
        at = 1 if lines[0].startswith("Usage:") else 0
        lines.insert(at, line)
        return "\n".join(lines)

    command.get_help = get_help_with_version  # type: ignore[method-assign]
