from __future__ import annotations

import functools
import logging
from typing import Any, Callable, Iterable, Optional, Set, Tuple, Type, TypeVar

import click

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2
EXIT_SELFTEST_FAILED = 3


class UserFacingError(click.ClickException):
    def __init__(
        self,
        message: str,
        hint: Optional[str] = None,
        *,
        exit_code: int = EXIT_RUNTIME_ERROR,
    ) -> None:
        self.hint = hint
        self.exit_code = exit_code
        full_message = message
        if hint:
            full_message = f"{full_message}\nHint: {hint}"
        super().__init__(full_message)


def _walk_exception_chain(exc: BaseException) -> Iterable[BaseException]:
    seen: Set[int] = set()
    cur: Optional[BaseException] = exc
    while cur is not None and id(cur) not in seen:
        seen.add(id(cur))
        yield cur
        cur = cur.__cause__ or cur.__context__


def _trim_message(message: str) -> str:
    message = message.strip()
    if not message:
        return message
    return message if message.endswith(".") else f"{message}."


def _known_errors() -> Tuple[Tuple[Type[BaseException], str, Optional[str], int], ...]:
    # Imported lazily so `capteam-cli --help` does not pay for numpy imports.
    from capteamcli.config import ConfigError
    from capteamcli.envs import InvalidActionError, PlacementError, TeamError
    from capteamcli.evaluation import UnsupportedVariantError
    from capteamcli.nets import GraphError, VariantInputError
    from capteamcli.tensorcore import CheckpointError, GradientError, ShapeError
    from capteamcli.training import TrainingDivergedError

    return (
        (
            ConfigError,
            "Configuration error",
            "Fix the key named above in the config file or the matching --set override.",
            EXIT_CONFIG_ERROR,
        ),
        (
            CheckpointError,
            "Checkpoint error",
            "Pass a checkpoint written by `capteam-cli train` for the same --env.",
            EXIT_RUNTIME_ERROR,
        ),
        (
            UnsupportedVariantError,
            "Unsupported variant",
            "ID variants only work on robots from the training pool; use a ca_* checkpoint.",
            EXIT_RUNTIME_ERROR,
        ),
        (
            PlacementError,
            "Robot placement failed",
            "Use a smaller team or lower env.hsn.spawn_separation.",
            EXIT_RUNTIME_ERROR,
        ),
        (
            TrainingDivergedError,
            "Training diverged",
            "Lower train.lr or train.clip and run again.",
            EXIT_RUNTIME_ERROR,
        ),
        (TeamError, "Invalid team", None, EXIT_RUNTIME_ERROR),
        (VariantInputError, "Invalid policy input", None, EXIT_RUNTIME_ERROR),
        (GraphError, "Invalid communication graph", None, EXIT_RUNTIME_ERROR),
        (InvalidActionError, "Invalid action", None, EXIT_RUNTIME_ERROR),
        (ShapeError, "Shape error", None, EXIT_RUNTIME_ERROR),
        (GradientError, "Gradient error", None, EXIT_RUNTIME_ERROR),
    )


def to_user_facing_error(exc: BaseException) -> Optional[UserFacingError]:
    """Map the first known package error in the chain to a clean CLI error."""
    known = _known_errors()
    for candidate in _walk_exception_chain(exc):
        for error_type, label, hint, exit_code in known:
            if isinstance(candidate, error_type):
                return UserFacingError(
                    _trim_message(f"{label}: {candidate}"), hint, exit_code=exit_code
                )
    return None


F = TypeVar("F", bound=Callable[..., Any])


def translate_errors(function: F) -> F:
    """Re-raise known package errors from a command as ``UserFacingError``."""

    @functools.wraps(function)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return function(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as error:
            friendly = to_user_facing_error(error)
            if friendly is None:
                raise
            logging.getLogger(function.__module__).debug(
                "Suppressed traceback for %s", function.__name__, exc_info=error
            )
            raise friendly from error

    return wrapper  # type: ignore[return-value]
