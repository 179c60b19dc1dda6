from __future__ import annotations

from colorama import Fore, Style

_ENABLED: bool = False


def set_enabled(enabled: bool) -> None:
    global _ENABLED
    _ENABLED = enabled


def enabled() -> bool:
    return _ENABLED


def c(text: str, color: str, bright: bool = False) -> str:
    """Wrap ``text`` in a colorama color given by name ("cyan") or code."""
    if not _ENABLED:
        return text
    code = getattr(Fore, color.upper(), color)
    return f"{code}{Style.BRIGHT if bright else ''}{text}{Style.RESET_ALL}"


def ok(text: str) -> str:
    return c(text, "green")


def warn(text: str) -> str:
    return c(text, "yellow", bright=True)


def err(text: str) -> str:
    return c(text, "red", bright=True)


def dim(text: str) -> str:
    return c(text, "white")


def verdict(passed: bool) -> str:
    return ok("PASS") if passed else err("FAIL")
