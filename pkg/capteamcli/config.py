"""Experiment configuration: JSON file, ``--set`` overrides and command flags.

Resolution order is built-in defaults, then the file, then each
``--set dotted.key=value`` in order, then explicit command-line flags. Every
key is checked against the dataclass it fills, so a typo fails loudly with
the full dotted name.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import typing
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union, get_type_hints

from capteamcli.envs import EnvConfig, EnvKind, Zone
from capteamcli.evaluation import EvalProtocol
from capteamcli.nets import PolicyVariant
from capteamcli.training import TrainConfig
from capteamcli.utils.io import dump_json, write_text_atomic

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "config.resolved.json"
DEFAULT_OUT_DIR = "runs"
# Where a run writes does not change what it computes; left out of the hash.
RUN_LOCATION_KEYS = ("out_dir",)


class ConfigError(ValueError):
    """Raised for unknown keys, wrong types and out-of-range values."""


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalProtocol = field(default_factory=EvalProtocol)
    env_kind: EnvKind = EnvKind.HSN
    variant: PolicyVariant = PolicyVariant.CA_CC_GNN
    seed: int = 0
    out_dir: str = DEFAULT_OUT_DIR

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if not str(self.out_dir).strip():
            raise ValueError("out_dir must not be empty")


def _type_name(hint: Any) -> str:
    return getattr(hint, "__name__", str(hint).replace("typing.", ""))


def _coerce(value: Any, hint: Any, key: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)

    if origin is Union:
        if value is None and type(None) in args:
            return None
        (inner,) = [a for a in args if a is not type(None)]
        return _coerce(value, inner, key)

    if dataclasses.is_dataclass(hint) and hint is not Zone:
        if not isinstance(value, Mapping):
            raise ConfigError(f"{key} must be an object, got {value!r}")
        return _build(hint, value, key)

    if hint is Zone:
        try:
            return Zone.from_list(value)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"{key}: {error}") from None

    if isinstance(hint, type) and issubclass(hint, Enum):
        try:
            return hint.parse(value) if hasattr(hint, "parse") else hint(value)
        except ValueError as error:
            raise ConfigError(f"{key}: {error}") from None

    if origin in (tuple, Tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key} must be a list, got {value!r}")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(v, args[0], f"{key}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(f"{key} must hold {len(args)} values, got {len(value)}")
        return tuple(
            _coerce(v, a, f"{key}[{i}]") for i, (v, a) in enumerate(zip(value, args))
        )

    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{key}: unsupported setting type {_type_name(hint)}")


def _build(cls, data: Mapping[str, Any], prefix: str = ""):
    hints = get_type_hints(cls)
    names = [f.name for f in dataclasses.fields(cls)]
    unknown = sorted(set(data) - set(names))
    if unknown:
        where = f" in {prefix}" if prefix else ""
        raise ConfigError(
            f"unknown key(s) {', '.join(unknown)}{where}; "
            f"expected one of {', '.join(names)}"
        )
    kwargs = {}
    for name, value in data.items():
        key = f"{prefix}.{name}" if prefix else name
        kwargs[name] = _coerce(value, hints[name], key)
    try:
        return cls(**kwargs)
    except ValueError as error:
        label = prefix or "config"
        raise ConfigError(f"{label}: {error}") from None


def config_to_dict(value: Any) -> Any:
    if isinstance(value, Zone):
        return value.as_list()
    if dataclasses.is_dataclass(value):
        return {
            f.name: config_to_dict(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [config_to_dict(v) for v in value]
    return value


def parse_override(text: str) -> Tuple[str, Any]:
    """``train.lr=0.005`` -> ("train.lr", 0.005); non-JSON values stay strings."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like dotted.key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key or any(not part for part in key.split(".")):
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def set_dotted(tree: Dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node = tree
    for depth, part in enumerate(parts[:-1]):
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(
                f"cannot set {key}: {'.'.join(parts[: depth + 1])} is not an object"
            )
        node = child
    node[parts[-1]] = value


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise ConfigError(f"cannot read config file {path}: {error}") from None
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError(
            f"{path} is not valid JSON (line {error.lineno}, column {error.colno}): "
            f"{error.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object at the top level")
    return data


def parse_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Resolve defaults, file, ``--set`` overrides and flags into one config.

    ``flags`` holds explicit command-line values by top-level key; ``None``
    values are ignored. The experiment seed is copied into ``train.seed``.
    """
    tree: Dict[str, Any] = read_config_file(path) if path else {}
    for text in overrides:
        key, value = parse_override(text)
        set_dotted(tree, key, value)
    for key, value in (flags or {}).items():
        if value is not None:
            set_dotted(tree, key, value)
    config = _build(ExperimentConfig, tree)
    config = dataclasses.replace(
        config, train=dataclasses.replace(config.train, seed=config.seed)
    )
    logger.debug("resolved config: %s", json.dumps(config_to_dict(config)))
    return config


def render_config(config: ExperimentConfig) -> str:
    """Canonical JSON of everything that determines a run's results."""
    tree = config_to_dict(config)
    for key in RUN_LOCATION_KEYS:
        tree.pop(key, None)
    return dump_json(tree)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(render_config(config).encode("utf-8")).hexdigest()


def write_resolved_config(config: ExperimentConfig, out_dir: Union[str, Path]) -> Path:
    return write_text_atomic(Path(out_dir) / RESOLVED_CONFIG_NAME, render_config(config))
