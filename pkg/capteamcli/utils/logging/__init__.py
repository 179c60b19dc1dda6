from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

from colorama import init as colorama_init

from capteamcli.utils import colors
from capteamcli.utils.logging.formatters import ColorLevelFormatter

LOG_FORMAT = "%(asctime)s;%(levelname)s;%(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
PRODUCTION_ENV_ALIASES = frozenset({"prod", "production"})


@dataclass(frozen=True)
class LoggingConfig:
    level: int = logging.INFO
    log_file: Optional[str] = None
    color: bool = True


def apply_logging_policies(
    level: int,
    *,
    quiet: bool,
    environment: Optional[str],
    explicit_log_level: bool = False,
) -> int:
    """Production runs and ``--quiet`` floor the level at WARNING.

    An explicit ``--log-level`` wins over the production floor, not over quiet.
    """
    effective_level = level
    if (environment or "").strip().lower() in PRODUCTION_ENV_ALIASES:
        if not explicit_log_level:
            effective_level = max(effective_level, logging.WARNING)
    if quiet:
        effective_level = max(effective_level, logging.WARNING)
    return effective_level


def current_environment() -> Optional[str]:
    return os.getenv("ENVIRONMENT")


def setup_logging(cfg: LoggingConfig) -> None:
    root = logging.getLogger()
    if root.hasHandlers():
        root.handlers.clear()
    root.setLevel(cfg.level)

    # A log file turns color off everywhere.
    color_enabled = False if cfg.log_file else cfg.color
    colorama_init(strip=not color_enabled)
    colors.set_enabled(color_enabled)

    # stderr keeps stdout free for summaries that get piped.
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(
        ColorLevelFormatter(LOG_FORMAT, DATE_FORMAT, color_enabled)
    )
    root.addHandler(stream_handler)

    if cfg.log_file:
        file_handler = logging.FileHandler(cfg.log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
        root.addHandler(file_handler)
    logging.getLogger(__name__).debug(
        "logging configured at %s", logging.getLevelName(cfg.level)
    )
