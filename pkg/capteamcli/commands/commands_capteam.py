import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

import click

from capteamcli.callbacks import csv_to_int_list, csv_to_list
from capteamcli.utils import (
    colors,
    common_experiment_options,
    env_option,
    variant_option,
)
from capteamcli.utils.friendly_errors import (
    EXIT_SELFTEST_FAILED,
    UserFacingError,
    translate_errors,
)

logger = logging.getLogger(__name__)


@click.command(
    "train",
    help="Train a shared policy on the five fixed training teams with PPO.",
)
@env_option
@variant_option
@common_experiment_options
@translate_errors
def train_cmd(
    env_kind: Optional[str],
    variant: Optional[str],
    config_path: Optional[Path],
    overrides: Tuple[str, ...],
    seed: Optional[int],
    out_dir: Optional[Path],
) -> None:
    from capteamcli.commands.train import run_train, summarize
    from capteamcli.config import parse_config

    config = parse_config(
        config_path,
        overrides,
        flags={
            "env_kind": env_kind,
            "variant": variant,
            "seed": seed,
            "out_dir": None if out_dir is None else str(out_dir),
        },
    )
    click.echo(summarize(run_train(config)))


@click.command(
    "eval",
    help="Evaluate a trained policy checkpoint zero-shot on new teams.",
)
@click.option(
    "-k",
    "--checkpoint",
    "checkpoint_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, readable=True, path_type=Path),
    help="Policy checkpoint written by `capteam-cli train`.",
)
@env_option
@click.option(
    "-a",
    "--axis",
    default=None,
    type=click.Choice(["train", "composition", "new-robots"], case_sensitive=False),
    help="Generalization axis: training teams, new compositions or new robots.",
)
@click.option(
    "-s",
    "--sizes",
    default=None,
    callback=csv_to_int_list,
    help="Comma-separated team sizes, e.g. 3,4,5 or 8,10,15.",
)
@common_experiment_options
@translate_errors
def eval_cmd(
    checkpoint_path: Path,
    env_kind: Optional[str],
    axis: Optional[str],
    sizes: Optional[Tuple[int, ...]],
    config_path: Optional[Path],
    overrides: Tuple[str, ...],
    seed: Optional[int],
    out_dir: Optional[Path],
) -> None:
    from capteamcli.commands.evaluate import resolve_eval_config, run_eval, summarize
    from capteamcli.tensorcore import load_checkpoint

    checkpoint = load_checkpoint(checkpoint_path)
    config = resolve_eval_config(
        checkpoint,
        config_path,
        overrides,
        env_kind=env_kind,
        seed=seed,
        out_dir=out_dir,
        axis=None if axis is None else axis.lower(),
        sizes=sizes,
    )
    for line in summarize(run_eval(checkpoint, config)):
        click.echo(line)


@click.command(
    "selftest",
    help="Run the built-in oracle suites and report PASS/FAIL for each.",
)
@click.option(
    "--suite",
    "suites",
    multiple=True,
    callback=csv_to_list,
    help="Run only these suites (repeatable or comma-separated).",
)
@click.option(
    "--seed",
    default=0,
    show_default=True,
    type=click.IntRange(min=0),
    help="Seed for the suites' random cases.",
)
@click.option(
    "--quick",
    is_flag=True,
    default=False,
    help="Fewer cases per suite, for a fast smoke check.",
)
@translate_errors
def selftest_cmd(suites: Sequence[str], seed: int, quick: bool) -> None:
    from capteamcli.selftest import SUITES, run_suites

    unknown = [name for name in suites or () if name not in SUITES]
    if unknown:
        raise click.BadParameter(
            f"unknown suite(s) {', '.join(unknown)}; expected one of {', '.join(SUITES)}",
            param_hint="--suite",
        )
    results = run_suites(suites or None, seed=seed, quick=quick)
    for result in results:
        click.echo(
            f"{colors.verdict(result.passed)} {result.name:<14} "
            f"{colors.dim(f'({result.seconds:.1f}s)')} {result.detail}"
        )
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise UserFacingError(
            f"{len(failed)} of {len(results)} suite(s) failed: {', '.join(failed)}.",
            "Re-run with --log-level DEBUG for the full error of each failing suite.",
            exit_code=EXIT_SELFTEST_FAILED,
        )
    click.echo(colors.ok(f"All {len(results)} suites passed."))
