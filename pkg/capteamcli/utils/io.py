import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Union


def write_text_atomic(file_path: Union[str, Path], data: str) -> Path:
    """Write ``data`` next to ``file_path`` and rename it into place."""
    if not str(file_path):
        raise ValueError("You must specify a file path to write data to.")
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as stream:
            stream.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logging.debug("Data written to file: %s", path)
    return path


def dump_json(payload: Any) -> str:
    """Stable rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json_atomic(file_path: Union[str, Path], payload: Any) -> Path:
    return write_text_atomic(file_path, dump_json(payload))
