from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

MAX_TEAM_SIZE = 32


class TeamError(ValueError):
    """Raised when a robot or team description violates its invariants."""


class EnvKind(str, Enum):
    HMT = "hmt"
    HSN = "hsn"

    @property
    def capability_dim(self) -> int:
        return 2 if self is EnvKind.HMT else 1

    @classmethod
    def parse(cls, value: "str | EnvKind") -> "EnvKind":
        if isinstance(value, EnvKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise TeamError(
                f"unknown environment {value!r}; expected 'hmt' or 'hsn'"
            ) from None


@dataclass(frozen=True)
class RobotSpec:
    """One robot: its capability vector and, for pool robots, its id index.

    HMT capabilities are (lumber capacity, concrete capacity); HSN capability
    is the sensing radius in meters.
    """

    capability: Tuple[float, ...]
    id_index: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "capability", tuple(float(c) for c in self.capability)
        )
        if not self.capability:
            raise TeamError("a robot needs at least one capability entry")
        if any(not np.isfinite(c) or c < 0 for c in self.capability):
            raise TeamError(f"capabilities must be finite and >= 0: {self.capability}")
        if self.id_index is not None and self.id_index < 0:
            raise TeamError(f"id_index must be >= 0, got {self.id_index}")


@dataclass(frozen=True)
class TeamSpec:
    robots: Tuple[RobotSpec, ...]
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "robots", tuple(self.robots))
        if not 1 <= len(self.robots) <= MAX_TEAM_SIZE:
            raise TeamError(
                f"team {self.name!r} has {len(self.robots)} robots; "
                f"expected 1..{MAX_TEAM_SIZE}"
            )
        dims = {len(r.capability) for r in self.robots}
        if len(dims) != 1:
            raise TeamError(f"team {self.name!r} mixes capability dimensions {dims}")

    @property
    def size(self) -> int:
        return len(self.robots)

    @property
    def has_ids(self) -> bool:
        return all(r.id_index is not None for r in self.robots)

    def capabilities(self) -> np.ndarray:
        return np.array([r.capability for r in self.robots], dtype=np.float64)

    def one_hot_ids(self, id_dim: int) -> np.ndarray:
        out = np.zeros((self.size, id_dim))
        for row, robot in enumerate(self.robots):
            if robot.id_index is None:
                raise TeamError(
                    f"robot {row} of team {self.name!r} has no training-pool id"
                )
            if robot.id_index >= id_dim:
                raise TeamError(
                    f"robot id {robot.id_index} does not fit a {id_dim}-wide one-hot"
                )
            out[row, robot.id_index] = 1.0
        return out


def validate_team(env_kind: "str | EnvKind", team: TeamSpec) -> None:
    kind = EnvKind.parse(env_kind)
    caps = team.capabilities()
    if caps.shape[1] != kind.capability_dim:
        raise TeamError(
            f"{kind.value} robots carry {kind.capability_dim} capability value(s), "
            f"team {team.name!r} has {caps.shape[1]}"
        )
    if kind is EnvKind.HSN and np.any((caps <= 0) | (caps > 1.0)):
        raise TeamError(f"sensing radii must lie in (0, 1]: {caps[:, 0].tolist()}")
    if kind is EnvKind.HMT and np.any(caps > 1.0):
        raise TeamError(f"carrying capacities must lie in [0, 1]: {caps.tolist()}")


# Rows are (concrete capacity, lumber capacity); RobotSpec stores (lumber, concrete).
HMT_TRAINING_TABLE: Tuple[Tuple[Tuple[float, float], ...], ...] = (
    ((0.9, 0.1), (0.7, 0.3), (1.0, 0.0), (0.0, 1.0)),
    ((0.9, 0.1), (0.7, 0.3), (0.0, 1.0), (0.2, 0.8)),
    ((0.8, 0.2), (0.3, 0.7), (0.4, 0.6), (0.7, 0.3)),
    ((1.0, 0.0), (0.0, 1.0), (0.1, 0.9), (0.3, 0.7)),
    ((0.6, 0.4), (0.3, 0.7), (0.7, 0.3), (0.0, 1.0)),
)

HSN_TRAINING_TABLE: Tuple[Tuple[float, ...], ...] = (
    (0.2191, 0.2946, 0.2608, 0.3668),
    (0.2746, 0.2746, 0.5824, 0.5756),
    (0.3178, 0.3467, 0.5317, 0.6073),
    (0.2007, 0.5722, 0.5153, 0.4622),
    (0.4487, 0.5526, 0.5826, 0.58343),
)


def make_training_teams(env_kind: "str | EnvKind") -> List[TeamSpec]:
    """The five fixed four-robot training teams, ids 0..19 in table order."""
    kind = EnvKind.parse(env_kind)
    teams: List[TeamSpec] = []
    next_id = 0
    if kind is EnvKind.HMT:
        for number, row in enumerate(HMT_TRAINING_TABLE, start=1):
            robots = []
            for concrete, lumber in row:
                robots.append(RobotSpec((lumber, concrete), id_index=next_id))
                next_id += 1
            teams.append(TeamSpec(tuple(robots), name=f"hmt-train-{number}"))
    else:
        for number, row in enumerate(HSN_TRAINING_TABLE, start=1):
            robots = []
            for radius in row:
                robots.append(RobotSpec((radius,), id_index=next_id))
                next_id += 1
            teams.append(TeamSpec(tuple(robots), name=f"hsn-train-{number}"))
    return teams


def training_pool(env_kind: "str | EnvKind") -> List[RobotSpec]:
    return [robot for team in make_training_teams(env_kind) for robot in team.robots]


def team_from_capabilities(
    capabilities: Sequence[Sequence[float]], name: str = "custom"
) -> TeamSpec:
    return TeamSpec(tuple(RobotSpec(tuple(c)) for c in capabilities), name=name)
