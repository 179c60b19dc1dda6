from __future__ import annotations

import logging

from colorama import Fore, Style

_LEVEL_STYLES = (
    (logging.CRITICAL, Fore.MAGENTA + Style.BRIGHT),
    (logging.ERROR, Fore.RED + Style.BRIGHT),
    (logging.WARNING, Fore.YELLOW + Style.BRIGHT),
    (logging.INFO, Fore.GREEN),
)


class ColorLevelFormatter(logging.Formatter):
    """Colors only the level name; the record itself is left untouched."""

    def __init__(self, fmt: str, datefmt: str, enable_color: bool) -> None:
        super().__init__(fmt=fmt, datefmt=datefmt)
        self._enable_color = enable_color

    def format(self, record: logging.LogRecord) -> str:
        original = record.levelname
        try:
            if self._enable_color:
                record.levelname = self.color_levelname(
                    record.levelname, record.levelno
                )
            return super().format(record)
        finally:
            record.levelname = original

    @staticmethod
    def color_levelname(levelname: str, levelno: int) -> str:
        for threshold, style in _LEVEL_STYLES:
            if levelno >= threshold:
                return f"{style}{levelname}{Style.RESET_ALL}"
        return f"{Fore.CYAN}{levelname}{Style.RESET_ALL}"
