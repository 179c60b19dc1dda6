"""Heterogeneous material transport.

Robots shuttle lumber and concrete from two depots to a construction site
until both integer quotas are met. The shared team reward is the sum of the
per-robot pickup, dropoff, surplus and time terms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from capteamcli.envs.base import (
    ACTION_DELTAS,
    StepResult,
    validate_actions,
)
from capteamcli.envs.config import HMTConfig
from capteamcli.envs.teams import EnvKind, TeamSpec, validate_team
from capteamcli.tensorcore import RngStream

logger = logging.getLogger(__name__)

LUMBER, CONCRETE = 0, 1
HMT_OBS_DIM = 13
# Float sums of fractional capacities (0.7 + 0.3) must still meet integer quotas.
QUOTA_TOLERANCE = 1e-9


@dataclass(frozen=True)
class HMTEventLog:
    pickups: int = 0
    valid_dropoffs: int = 0
    surplus_total: float = 0.0
    unfilled_robot_steps: int = 0
    picked_up: Tuple[float, float] = (0.0, 0.0)

    def reconstructed_reward(self, config: HMTConfig = HMTConfig()) -> float:
        return (
            config.pickup_reward * self.pickups
            + config.dropoff_reward * self.valid_dropoffs
            - config.surplus_penalty * self.surplus_total
            - config.time_penalty * self.unfilled_robot_steps
        )


@dataclass(frozen=True)
class HMTState:
    positions: np.ndarray
    velocities: np.ndarray
    carried: np.ndarray
    quota: np.ndarray
    delivered: np.ndarray
    step: int = 0
    events: HMTEventLog = field(default_factory=HMTEventLog)
    quota_filled_step: Optional[int] = None

    @property
    def quota_filled(self) -> bool:
        return bool(np.all(self.delivered >= self.quota - QUOTA_TOLERANCE))


def hmt_observations(state: HMTState, config: HMTConfig = HMTConfig()) -> np.ndarray:
    """N x 13: pos, vel, carried, distances to lumber/concrete/site, quota, delivered."""
    n = state.positions.shape[0]
    distances = np.stack(
        [
            np.linalg.norm(state.positions - zone.center, axis=1)
            for zone in (
                config.lumber_depot,
                config.concrete_depot,
                config.construction_site,
            )
        ],
        axis=1,
    )
    shared = np.concatenate([state.quota, state.delivered])
    return np.concatenate(
        [
            state.positions,
            state.velocities,
            state.carried,
            distances,
            np.broadcast_to(shared, (n, 4)),
        ],
        axis=1,
    )


def hmt_observe(state: HMTState, i: int, config: HMTConfig = HMTConfig()) -> np.ndarray:
    """Robot i's environment observation, without the capability or id block.

    ``full_observation`` appends that block for the policy variant in use.
    """
    if not 0 <= i < state.positions.shape[0]:
        raise IndexError(f"robot index {i} outside team of {state.positions.shape[0]}")
    return hmt_observations(state, config)[i]


def hmt_reset(
    team: TeamSpec, rng: RngStream, config: HMTConfig = HMTConfig()
) -> Tuple[HMTState, np.ndarray]:
    validate_team(EnvKind.HMT, team)
    n = team.size
    generator = rng.generator
    if config.fixed_quota is not None:
        quota = np.array(config.fixed_quota, dtype=np.float64)
    else:
        low = math.ceil(config.quota_min_factor * n)
        high = math.floor(config.quota_max_factor * n)
        quota = generator.integers(low, high + 1, size=2).astype(np.float64)
    positions = config.construction_site.sample(generator, n)
    state = HMTState(
        positions=positions,
        velocities=np.zeros((n, 2)),
        carried=np.zeros((n, 2)),
        quota=quota,
        delivered=np.zeros(2),
    )
    logger.debug("HMT reset: team=%s quota=%s", team.name, quota.tolist())
    return state, hmt_observations(state, config)


def hmt_step(
    state: HMTState,
    actions,
    team: TeamSpec,
    config: HMTConfig = HMTConfig(),
) -> Tuple[HMTState, StepResult]:
    n = team.size
    acts = validate_actions(actions, n)
    capacity = team.capabilities()

    target = config.arena.clamp(state.positions + ACTION_DELTAS[acts] * config.step_size)
    velocities = target - state.positions
    carried = state.carried.copy()
    delivered = state.delivered.copy()
    picked_up = np.array(state.events.picked_up)
    pickups = valid_dropoffs = 0
    surplus_total = 0.0
    reward = 0.0

    depots = ((LUMBER, config.lumber_depot), (CONCRETE, config.concrete_depot))
    for i in range(n):
        position = target[i]
        if carried[i].sum() == 0.0:
            for material, zone in depots:
                unmet = delivered[material] < state.quota[material] - QUOTA_TOLERANCE
                if zone.contains(position) and unmet and capacity[i, material] > 0:
                    carried[i, material] = capacity[i, material]
                    picked_up[material] += capacity[i, material]
                    pickups += 1
                    reward += config.pickup_reward
                    break
        elif config.construction_site.contains(position):
            for material in (LUMBER, CONCRETE):
                amount = carried[i, material]
                if amount <= 0.0:
                    continue
                remaining = state.quota[material] - delivered[material]
                if remaining > QUOTA_TOLERANCE:
                    valid_dropoffs += 1
                    reward += config.dropoff_reward
                surplus = max(0.0, amount - max(0.0, remaining))
                if surplus > QUOTA_TOLERANCE:
                    surplus_total += surplus
                    reward -= config.surplus_penalty * surplus
                delivered[material] += amount
                carried[i, material] = 0.0

    filled = bool(np.all(delivered >= state.quota - QUOTA_TOLERANCE))
    unfilled_robot_steps = 0
    if not filled:
        unfilled_robot_steps = n
        reward -= config.time_penalty * n
    step = state.step + 1
    events = HMTEventLog(
        pickups=state.events.pickups + pickups,
        valid_dropoffs=state.events.valid_dropoffs + valid_dropoffs,
        surplus_total=state.events.surplus_total + surplus_total,
        unfilled_robot_steps=state.events.unfilled_robot_steps + unfilled_robot_steps,
        picked_up=(float(picked_up[0]), float(picked_up[1])),
    )
    new_state = replace(
        state,
        positions=target,
        velocities=velocities,
        carried=carried,
        delivered=delivered,
        step=step,
        events=events,
        quota_filled_step=(
            state.quota_filled_step
            if state.quota_filled_step is not None
            else (step if filled else None)
        ),
    )
    done = filled or step >= config.horizon
    info = {
        "step": step,
        "quota_filled": filled,
        "quota": state.quota.copy(),
        "delivered": delivered.copy(),
        "events": events,
    }
    return new_state, StepResult(hmt_observations(new_state, config), reward, done, info)


class HMTEnv:
    """Stateful wrapper used by rollouts; one instance per thread."""

    kind = EnvKind.HMT
    obs_dim = HMT_OBS_DIM

    def __init__(self, team: TeamSpec, config: HMTConfig = HMTConfig()) -> None:
        validate_team(EnvKind.HMT, team)
        self.team = team
        self.config = config
        self.state: Optional[HMTState] = None

    def reset(self, team: TeamSpec, rng: RngStream) -> np.ndarray:
        self.team = team
        self.state, observations = hmt_reset(team, rng, self.config)
        return observations

    def step(self, actions) -> StepResult:
        if self.state is None:
            raise RuntimeError("HMTEnv.step called before reset")
        self.state, result = hmt_step(self.state, actions, self.team, self.config)
        return result

    def observe(self) -> np.ndarray:
        if self.state is None:
            raise RuntimeError("HMTEnv.observe called before reset")
        return hmt_observations(self.state, self.config)
