# Checks that the installed CLI imports and runs on the oldest supported Python.

from click.testing import CliRunner

from capteamcli.__main__ import cli

runner = CliRunner()
result = runner.invoke(cli, ["--help"])
assert result.exit_code == 0, f"capteam-cli --help failed:\n{result.output}"

result = runner.invoke(cli, ["selftest", "--quick", "--suite", "n-step,hsn-reward"])
assert result.exit_code == 0, f"capteam-cli selftest failed:\n{result.output}"
print("capteam-cli loads and passes the quick selftest")
