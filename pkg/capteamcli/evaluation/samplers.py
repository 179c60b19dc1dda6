"""Team generators for the generalization settings."""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import List, Sequence, Tuple

from capteamcli.envs import EnvKind, RobotSpec, TeamSpec
from capteamcli.tensorcore import RngStream

NEW_ROBOT_RADIUS_RANGE = (0.2, 0.6)
NEW_ROBOT_CAPACITY_RANGE = (0.0, 1.0)
HSN_RADIUS_BINS: Tuple[Tuple[str, float, float], ...] = (
    ("small", 0.20, 0.33),
    ("medium", 0.33, 0.46),
    ("large", 0.46, 0.60),
)


def _check_request(size: int, count: int) -> None:
    if size < 1:
        raise ValueError(f"team size must be >= 1, got {size}")
    if count < 1:
        raise ValueError(f"team count must be >= 1, got {count}")


def sample_composition_teams(
    pool: Sequence[RobotSpec], size: int, count: int, rng: RngStream
) -> List[TeamSpec]:
    """Draw each robot uniformly, with replacement, from ``pool``.

    Robots keep their pool id so ID variants can still be evaluated.
    """
    _check_request(size, count)
    if not pool:
        raise ValueError("the robot pool is empty")
    picks = rng.generator.integers(0, len(pool), size=(count, size))
    return [
        TeamSpec(tuple(pool[i] for i in row), name=f"composition-{size}-{k}")
        for k, row in enumerate(picks.tolist())
    ]


def sample_new_robot_teams(
    env_kind: "str | EnvKind", size: int, count: int, rng: RngStream
) -> List[TeamSpec]:
    """Fresh robots with iid capabilities and no pool id."""
    _check_request(size, count)
    kind = EnvKind.parse(env_kind)
    generator = rng.generator
    if kind is EnvKind.HSN:
        low, high = NEW_ROBOT_RADIUS_RANGE
        values = generator.uniform(low, high, size=(count, size, 1))
    else:
        low, high = NEW_ROBOT_CAPACITY_RANGE
        values = generator.uniform(low, high, size=(count, size, 2))
    return [
        TeamSpec(
            tuple(RobotSpec(tuple(robot)) for robot in team),
            name=f"new-robots-{size}-{k}",
        )
        for k, team in enumerate(values.tolist())
    ]


def bin_and_build_hsn_pool(rng: RngStream, size: int = 4) -> List[TeamSpec]:
    """Every multiset of radius bins for ``size`` robots, one radius drawn per slot.

    With three bins and four robots this yields 15 teams. Teams are named after
    their bins, e.g. ``hsn-small-small-medium-large``.
    """
    teams = []
    generator = rng.generator
    for combo in combinations_with_replacement(range(len(HSN_RADIUS_BINS)), size):
        robots = []
        for b in combo:
            _, low, high = HSN_RADIUS_BINS[b]
            robots.append(RobotSpec((float(generator.uniform(low, high)),)))
        label = "-".join(HSN_RADIUS_BINS[b][0] for b in combo)
        teams.append(TeamSpec(tuple(robots), name=f"hsn-{label}"))
    return teams
