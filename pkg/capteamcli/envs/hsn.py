"""Heterogeneous sensor network.

Robots with different sensing radii spread out to form a connected network
while keeping the overlap between sensing disks small. The team reward is a
sum over robot pairs of a piecewise term in the gap between their disks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from capteamcli.envs.base import ACTION_DELTAS, StepResult, validate_actions
from capteamcli.envs.config import HSNConfig
from capteamcli.envs.metrics import (
    connectivity_check,
    min_pairwise_distance,
    pairwise_distances,
    pairwise_overlap,
)
from capteamcli.envs.safety import closest_approach, safety_filter
from capteamcli.envs.teams import EnvKind, TeamSpec, validate_team
from capteamcli.tensorcore import RngStream

logger = logging.getLogger(__name__)

HSN_OBS_DIM = 2


class PlacementError(RuntimeError):
    """Raised when a team cannot be spread out at the required spacing."""


@dataclass(frozen=True)
class HSNState:
    positions: np.ndarray
    step: int = 0


def hsn_pair_reward(p_i, p_j, c_i: float, c_j: float) -> float:
    gap = float(np.linalg.norm(np.asarray(p_i, float) - np.asarray(p_j, float))) - (
        c_i + c_j
    )
    if gap < 0:
        return -0.9 * abs(gap) + 0.05
    return -1.1 * abs(gap) - 0.05


def hsn_team_reward(positions, radii) -> float:
    positions = np.asarray(positions, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64).reshape(-1)
    n = positions.shape[0]
    if n < 2:
        return 0.0
    rows, cols = np.triu_indices(n, k=1)
    gaps = pairwise_distances(positions)[rows, cols] - (radii[rows] + radii[cols])
    terms = np.where(gaps < 0, -0.9 * np.abs(gaps) + 0.05, -1.1 * np.abs(gaps) - 0.05)
    return float(terms.sum())


def hsn_observations(state: HSNState) -> np.ndarray:
    return state.positions.copy()


def hsn_observe(state: HSNState, i: int) -> np.ndarray:
    """Robot i's own position.

    This is the environment half of the observation only. Policies see it
    with the capability or id block appended by ``full_observation``.
    """
    if not 0 <= i < state.positions.shape[0]:
        raise IndexError(f"robot index {i} outside team of {state.positions.shape[0]}")
    return state.positions[i].copy()


def hsn_reset(
    team: TeamSpec, rng: RngStream, config: HSNConfig = HSNConfig()
) -> Tuple[HSNState, np.ndarray]:
    """Place robots one by one, rejecting draws that land too close to earlier ones."""
    validate_team(EnvKind.HSN, team)
    generator = rng.generator
    placed = np.zeros((0, 2))
    attempts = 0
    while placed.shape[0] < team.size:
        if attempts >= config.spawn_attempts:
            raise PlacementError(
                f"could not place {team.size} robots {config.spawn_separation} m apart "
                f"within {config.spawn_attempts} attempts "
                f"(placed {placed.shape[0]})"
            )
        attempts += 1
        candidate = config.arena.sample(generator, 1)
        if placed.shape[0]:
            nearest = np.min(np.linalg.norm(placed - candidate, axis=1))
            if nearest < config.spawn_separation:
                continue
        placed = np.vstack([placed, candidate])
    logger.debug("HSN reset: team=%s placed after %d draws", team.name, attempts)
    state = HSNState(positions=placed)
    return state, hsn_observations(state)


def hsn_step(
    state: HSNState,
    actions,
    team: TeamSpec,
    config: HSNConfig = HSNConfig(),
) -> Tuple[HSNState, StepResult]:
    acts = validate_actions(actions, team.size)
    radii = team.capabilities()[:, 0]
    proposal = config.arena.clamp(
        state.positions + ACTION_DELTAS[acts] * config.step_size
    ) - state.positions
    displacements = safety_filter(
        state.positions,
        proposal,
        min_separation=config.min_separation,
        iterations=config.filter_iterations,
        max_sweeps=config.filter_sweeps,
    )
    new_state = replace(
        state, positions=state.positions + displacements, step=state.step + 1
    )
    reward = hsn_team_reward(new_state.positions, radii)
    info = {
        "step": new_state.step,
        "overlap": pairwise_overlap(new_state.positions, radii),
        "connected": connectivity_check(new_state.positions, radii),
        "min_distance": min_pairwise_distance(new_state.positions),
        "min_path_distance": closest_approach(state.positions, displacements),
    }
    done = new_state.step >= config.horizon
    return new_state, StepResult(hsn_observations(new_state), reward, done, info)


class HSNEnv:
    kind = EnvKind.HSN
    obs_dim = HSN_OBS_DIM

    def __init__(self, team: TeamSpec, config: HSNConfig = HSNConfig()) -> None:
        validate_team(EnvKind.HSN, team)
        self.team = team
        self.config = config
        self.state = None

    def reset(self, team: TeamSpec, rng: RngStream) -> np.ndarray:
        self.team = team
        self.state, observations = hsn_reset(team, rng, self.config)
        return observations

    def step(self, actions) -> StepResult:
        if self.state is None:
            raise RuntimeError("HSNEnv.step called before reset")
        self.state, result = hsn_step(self.state, actions, self.team, self.config)
        return result

    def observe(self) -> np.ndarray:
        if self.state is None:
            raise RuntimeError("HSNEnv.observe called before reset")
        return hsn_observations(self.state)
