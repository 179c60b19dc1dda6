import json
import logging

import click
import pytest

from capteamcli.callbacks import csv_to_int_list, csv_to_list
from capteamcli.config import parse_config
from capteamcli.manifest import RunManifest
from capteamcli.utils.io import dump_json, write_json_atomic
from capteamcli.utils.logging import LoggingConfig, apply_logging_policies, setup_logging
from capteamcli.utils.logging.formatters import ColorLevelFormatter

pytestmark = pytest.mark.unit


@pytest.mark.parametrize(
    "environment, quiet, explicit, expected",
    [
        (None, False, False, logging.INFO),
        ("prod", False, False, logging.WARNING),
        ("Production", False, True, logging.INFO),
        (None, True, True, logging.WARNING),
    ],
)
def test_logging_policies(environment, quiet, explicit, expected):
    level = apply_logging_policies(
        logging.INFO, quiet=quiet, environment=environment, explicit_log_level=explicit
    )
    assert level == expected


def test_log_file_disables_color(tmp_path):
    log_file = tmp_path / "run.log"
    root = logging.getLogger()
    previous = (root.level, list(root.handlers))
    try:
        setup_logging(LoggingConfig(level=logging.INFO, log_file=str(log_file), color=True))
        logging.getLogger("capteamcli.test").info("hello")
        for handler in root.handlers:
            handler.flush()
            assert not getattr(handler.formatter, "_enable_color", False)
    finally:
        root.handlers[:] = previous[1]
        root.setLevel(previous[0])
    assert ";INFO;hello" in log_file.read_text()


def test_formatter_restores_level_name():
    formatter = ColorLevelFormatter("%(levelname)s:%(message)s", "%H", True)
    record = logging.LogRecord("x", logging.WARNING, __file__, 1, "careful", None, None)
    assert "careful" in formatter.format(record)
    assert record.levelname == "WARNING"


def test_csv_callbacks():
    assert csv_to_list(None, None, ("a,b", "c|d", "e")) == ("a", "b", "c", "d", "e")
    assert csv_to_list(None, None, None) is None
    assert csv_to_int_list(None, None, "3, 4,5") == (3, 4, 5)
    assert csv_to_int_list(None, None, ()) is None
    with pytest.raises(click.BadParameter, match=">= 1"):
        csv_to_int_list(None, None, "3,0")


def test_json_is_sorted_and_strict(tmp_path):
    assert dump_json({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
    with pytest.raises(ValueError):
        dump_json({"x": float("nan")})
    path = write_json_atomic(tmp_path / "nested" / "out.json", {"k": "v"})
    assert json.loads(path.read_text()) == {"k": "v"}
    assert [p.name for p in path.parent.iterdir()] == ["out.json"]


def test_manifest_lists_relative_files(tmp_path):
    manifest = RunManifest.start("train", parse_config(overrides=["seed=5"]))
    (tmp_path / "sub").mkdir()
    manifest.add_file(tmp_path / "sub" / "a.csv", tmp_path)
    manifest.add_file(tmp_path / "sub" / "a.csv", tmp_path)
    path = manifest.write(tmp_path)
    data = json.loads(path.read_text())
    assert data["files"] == ["sub/a.csv"]
    assert data["seed"] == 5
    assert data["finished_at"] >= data["started_at"]
    assert len(data["config_hash"]) == 64
