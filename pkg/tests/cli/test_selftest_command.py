import pytest
from click.testing import CliRunner

from capteamcli import selftest
from capteamcli.__main__ import cli

pytestmark = pytest.mark.cli


@pytest.fixture
def runner():
    return CliRunner()


def test_single_suite_passes(runner):
    result = runner.invoke(cli, ["selftest", "--suite", "n-step,hsn-reward", "--quick"])
    assert result.exit_code == 0, result.output
    assert "PASS n-step" in result.output
    assert "PASS hsn-reward" in result.output
    assert "All 2 suites passed." in result.output


def test_failing_suite_exits_with_three(runner, monkeypatch):
    def broken(rng, quick):
        raise selftest.SuiteFailure("max error 0.5 exceeds 1e-09")

    monkeypatch.setitem(selftest.SUITES, "n-step", broken)
    result = runner.invoke(cli, ["selftest", "--suite", "n-step"])
    assert result.exit_code == 3
    assert "FAIL n-step" in result.output
    assert "max error 0.5" in result.output
    assert "1 of 1 suite(s) failed: n-step." in result.output


def test_crashing_suite_is_reported_not_raised(runner, monkeypatch):
    def crashing(rng, quick):
        raise ZeroDivisionError("boom")

    monkeypatch.setitem(selftest.SUITES, "overlap", crashing)
    result = runner.invoke(cli, ["selftest", "--suite", "overlap"])
    assert result.exit_code == 3
    assert "ZeroDivisionError: boom" in result.output


def test_unknown_suite(runner):
    result = runner.invoke(cli, ["selftest", "--suite", "speed"])
    assert result.exit_code == 2
    assert "unknown suite(s) speed" in result.output


@pytest.mark.parametrize("name", list(selftest.SUITES))
def test_quick_suites_pass(name):
    (result,) = selftest.run_suites([name], seed=0, quick=True)
    assert result.passed, result.detail
