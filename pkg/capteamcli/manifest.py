from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Union

from capteamcli.config import ExperimentConfig, config_hash
from capteamcli.utils.io import write_json_atomic
from capteamcli.utils.version import get_capteam_cli_version

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """What a run produced and how to reproduce it.

    ``files`` holds paths relative to the output directory, in the order they
    were written.
    """

    command: str
    config_hash: str
    version: str
    seed: int
    out_dir: str
    started_at: str
    finished_at: str = ""
    files: List[str] = field(default_factory=list)

    @classmethod
    def start(cls, command: str, config: ExperimentConfig) -> "RunManifest":
        return cls(
            command=command,
            config_hash=config_hash(config),
            version=get_capteam_cli_version(),
            seed=config.seed,
            out_dir=str(config.out_dir),
            started_at=utc_timestamp(),
        )

    def add_file(self, path: Union[str, Path], out_dir: Union[str, Path]) -> None:
        path, out_dir = Path(path), Path(out_dir)
        try:
            name = path.resolve().relative_to(out_dir.resolve()).as_posix()
        except ValueError:
            name = path.as_posix()
        if name not in self.files:
            self.files.append(name)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def write(self, out_dir: Union[str, Path]) -> Path:
        self.finished_at = utc_timestamp()
        path = write_json_atomic(Path(out_dir) / MANIFEST_NAME, self.to_dict())
        logger.info("Wrote run manifest: %s", path)
        return path
