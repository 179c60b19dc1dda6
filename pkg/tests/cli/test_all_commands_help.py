import pytest
from click.testing import CliRunner

from capteamcli.__main__ import cli
from capteamcli.utils.version import get_capteam_cli_version

pytestmark = pytest.mark.cli


# Help pages must render without importing numpy-heavy modules eagerly, and every
# page carries the version line.


@pytest.fixture
def runner():
    return CliRunner()


def test_root_help(runner):
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    assert "Usage:" in result.output
    assert f"Version: {get_capteam_cli_version()}" in result.output
    for name in ("train", "eval", "selftest"):
        assert name in result.output


def test_root_version_flag(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert f"capteam-cli version {get_capteam_cli_version()}" in result.output


def test_log_level_is_case_insensitive(runner):
    result = runner.invoke(cli, ["--log-level", "debug", "--version"])
    assert result.exit_code == 0


@pytest.mark.parametrize("name", sorted(cli.commands))
def test_every_command_has_help(runner, name):
    result = runner.invoke(cli, [name, "--help"])
    assert result.exit_code == 0, f"Failed on: {name} --help"
    assert "Usage:" in result.output
    assert f"Version: {get_capteam_cli_version()}" in result.output


def test_eval_requires_a_checkpoint(runner):
    result = runner.invoke(cli, ["eval"])
    assert result.exit_code == 2
    assert "--checkpoint" in result.output


def test_unknown_variant_is_a_usage_error(runner):
    result = runner.invoke(cli, ["train", "--variant", "big_gnn"])
    assert result.exit_code == 2
    assert "ca_cc_gnn" in result.output
