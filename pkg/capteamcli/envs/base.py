from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Protocol

import numpy as np

from capteamcli.envs.teams import EnvKind, TeamSpec
from capteamcli.nets.policies import ID_DIM, PolicyVariant
from capteamcli.tensorcore import RngStream

# Observation layout revision stored in checkpoints.
OBS_LAYOUT_VERSION = "1"

ACTION_NAMES = ("left", "right", "up", "down", "stop")
ACTION_DELTAS = np.array(
    [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [0.0, 0.0]]
)


class InvalidActionError(ValueError):
    """Raised when a step receives an action outside {0..4} or the wrong count."""


@dataclass
class StepResult:
    observations: np.ndarray
    reward: float
    done: bool
    info: Dict[str, Any] = field(default_factory=dict)


class Environment(Protocol):
    kind: EnvKind
    obs_dim: int
    team: TeamSpec

    def reset(self, team: TeamSpec, rng: RngStream) -> np.ndarray: ...

    def step(self, actions: np.ndarray) -> StepResult: ...

    def observe(self) -> np.ndarray: ...


def validate_actions(actions, num_robots: int) -> np.ndarray:
    array = np.asarray(actions)
    if array.shape != (num_robots,):
        raise InvalidActionError(
            f"expected {num_robots} actions, got shape {array.shape}"
        )
    if not np.issubdtype(array.dtype, np.integer):
        if not np.all(np.equal(np.mod(array, 1), 0)):
            raise InvalidActionError(f"actions must be integers, got {array.tolist()}")
    array = array.astype(np.int64)
    bad = (array < 0) | (array >= len(ACTION_NAMES))
    if np.any(bad):
        raise InvalidActionError(
            f"invalid action index {array[bad].tolist()}; expected 0..4 "
            f"({', '.join(ACTION_NAMES)})"
        )
    return array


def observation_suffix(team: TeamSpec, variant: "str | PolicyVariant") -> np.ndarray:
    """Per-robot block appended to observations: capabilities or one-hot ids."""
    variant = PolicyVariant.parse(variant)
    if variant.uses_ids:
        return team.one_hot_ids(ID_DIM)
    return team.capabilities()


def full_observation(
    base: np.ndarray, team: TeamSpec, variant: "str | PolicyVariant", i: int
) -> np.ndarray:
    """Robot i's policy input: its row of ``base`` followed by its suffix block."""
    if not 0 <= i < team.size:
        raise IndexError(f"robot index {i} outside team of {team.size}")
    return np.concatenate([base[i], observation_suffix(team, variant)[i]])
