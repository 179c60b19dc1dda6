from pathlib import Path

import click

ENV_CHOICES = ["hmt", "hsn"]
VARIANT_CHOICES = ["id_mlp", "id_gnn", "ca_mlp", "ca_gnn", "ca_cc_gnn"]


def to_lowercase(ctx, param, value):
    if value is None:
        return None
    return value.lower()


config_option = click.option(
    "-c",
    "--config",
    "config_path",
    default=None,
    type=click.Path(exists=True, dir_okay=False, readable=True, path_type=Path),
    help="JSON experiment file. An empty file means all defaults.",
)
set_option = click.option(
    "--set",
    "overrides",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override one setting by dotted key, e.g. --set train.lr=0.005. Repeatable.",
)
seed_option = click.option(
    "--seed",
    default=None,
    type=click.IntRange(min=0),
    help="Root seed for every random stream of the run.",
)
out_option = click.option(
    "-o",
    "--out",
    "out_dir",
    default=None,
    envvar="CAPTEAM_OUT_DIR",
    type=click.Path(file_okay=False, path_type=Path),
    help="Output directory. Can also be provided by CAPTEAM_OUT_DIR.",
)
env_option = click.option(
    "-e",
    "--env",
    "env_kind",
    default=None,
    type=click.Choice(ENV_CHOICES, case_sensitive=False),
    callback=to_lowercase,
    help="Task: hmt (material transport) or hsn (sensor network).",
)
variant_option = click.option(
    "-v",
    "--variant",
    default=None,
    type=click.Choice(VARIANT_CHOICES, case_sensitive=False),
    callback=to_lowercase,
    help="Policy architecture.",
)


def common_experiment_options(function):
    for option in reversed([config_option, set_option, seed_option, out_option]):
        function = option(function)
    return function
