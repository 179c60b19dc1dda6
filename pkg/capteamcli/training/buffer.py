"""On-policy rollout storage and collection."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Mapping, Optional, Sequence

import numpy as np

from capteamcli.envs import Environment, TeamSpec, observation_suffix
from capteamcli.nets import (
    Critic,
    Policy,
    SelectionMode,
    action_select,
    policy_forward,
    team_batch,
)
from capteamcli.tensorcore import RngStream, Tensor

logger = logging.getLogger(__name__)


@dataclass
class RolloutBuffer:
    """``T`` consecutive team steps; episodes may end and restart inside it.

    Per-robot arrays are shaped (T, N, ...); team-level arrays are (T,).
    ``final_observations``/``final_suffixes`` describe the state after the
    last record and feed the bootstrap value at the buffer end.
    """

    observations: np.ndarray
    suffixes: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    team_indices: np.ndarray
    final_observations: np.ndarray
    final_suffixes: np.ndarray

    def __len__(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def team_size(self) -> int:
        return int(self.observations.shape[1])


@dataclass(frozen=True)
class EpisodeRecord:
    team_index: int
    team_name: str
    episode_return: float
    steps: int
    quota_filled: Optional[bool] = None


class TeamScheduler:
    """Round-robin over the training teams, switching after N completed episodes."""

    def __init__(self, teams: Sequence[TeamSpec], resample_every: int = 10) -> None:
        if not teams:
            raise ValueError("at least one training team is required")
        sizes = {team.size for team in teams}
        if len(sizes) != 1:
            raise ValueError(f"training teams must share one size, got {sorted(sizes)}")
        if resample_every <= 0:
            raise ValueError(f"resample_every must be > 0, got {resample_every}")
        self.teams = list(teams)
        self.resample_every = resample_every
        self.index = 0
        self.completed_on_team = 0

    @property
    def current(self) -> TeamSpec:
        return self.teams[self.index]

    def episode_finished(self) -> bool:
        """Count an episode; True when the scheduler moved to the next team."""
        self.completed_on_team += 1
        if self.completed_on_team < self.resample_every:
            return False
        self.completed_on_team = 0
        self.index = (self.index + 1) % len(self.teams)
        return True


class EpisodeSession:
    """Keeps one environment running across rollout buffers.

    Episodes auto-reset; each reset draws from its own named stream so the
    trajectory only depends on the root seed and the episode count.
    """

    def __init__(
        self,
        env: Environment,
        scheduler: TeamScheduler,
        variant: str,
        rng: RngStream,
    ) -> None:
        self.env = env
        self.scheduler = scheduler
        self.variant = variant
        self.rng = rng
        self.episodes_started = 0
        self.episodes: List[EpisodeRecord] = []
        self.observations: Optional[np.ndarray] = None
        self.suffix: Optional[np.ndarray] = None
        self._return = 0.0
        self._steps = 0

    def start_episode(self) -> None:
        team = self.scheduler.current
        stream = self.rng.split(f"episode-{self.episodes_started}")
        self.observations = self.env.reset(team, stream)
        self.suffix = observation_suffix(team, self.variant)
        self.episodes_started += 1
        self._return = 0.0
        self._steps = 0

    def record_step(self, reward: float, done: bool, info: Mapping) -> None:
        self._return += reward
        self._steps += 1
        if not done:
            return
        team = self.scheduler.current
        filled = info.get("quota_filled")
        self.episodes.append(
            EpisodeRecord(
                team_index=self.scheduler.index,
                team_name=team.name,
                episode_return=self._return,
                steps=self._steps,
                quota_filled=None if filled is None else bool(filled),
            )
        )
        logger.debug(
            "episode %d on %s: return=%.4f steps=%d",
            len(self.episodes),
            team.name,
            self._return,
            self._steps,
        )
        if self.scheduler.episode_finished():
            logger.debug("switching to team %s", self.scheduler.current.name)
        self.start_episode()


ValueFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def critic_value_fn(critic: Critic, params: Mapping[str, Tensor]) -> ValueFn:
    def values(observations: np.ndarray, suffixes: np.ndarray) -> np.ndarray:
        return critic.values(params, observations, suffixes).astype(np.float64)

    return values


def collect_rollout(
    session: EpisodeSession,
    policy: Policy,
    policy_params: Mapping[str, Tensor],
    critic: Critic,
    critic_params: Mapping[str, Tensor],
    buffer_length: int,
    rng: RngStream,
) -> RolloutBuffer:
    """Step the session ``buffer_length`` times with soft action selection."""
    if session.observations is None:
        session.start_episode()
    n = session.scheduler.current.size
    obs_dim = session.env.obs_dim
    suffix_dim = critic.suffix_dim
    observations = np.zeros((buffer_length, n, obs_dim))
    suffixes = np.zeros((buffer_length, n, suffix_dim))
    actions = np.zeros((buffer_length, n), dtype=np.int64)
    log_probs = np.zeros((buffer_length, n))
    rewards = np.zeros(buffer_length)
    values = np.zeros(buffer_length)
    dones = np.zeros(buffer_length, dtype=bool)
    team_indices = np.zeros(buffer_length, dtype=np.int64)
    value_fn = critic_value_fn(critic, critic_params)

    for t in range(buffer_length):
        obs, suffix = session.observations, session.suffix
        observations[t] = obs
        suffixes[t] = suffix
        team_indices[t] = session.scheduler.index
        dist = policy_forward(policy, policy_params, team_batch(policy.variant, obs, suffix))
        selection = action_select(dist, SelectionMode.SOFT, rng)
        actions[t] = selection.actions
        log_probs[t] = selection.log_probs
        values[t] = value_fn(obs[None], suffix[None])[0]
        try:
            result = session.env.step(selection.actions)
        except Exception:
            logger.error(
                "environment step %d of the rollout failed on team %s",
                t,
                session.scheduler.current.name,
            )
            raise
        rewards[t] = result.reward
        dones[t] = result.done
        session.observations = result.observations
        session.record_step(result.reward, result.done, result.info)

    return RolloutBuffer(
        observations=observations,
        suffixes=suffixes,
        actions=actions,
        log_probs=log_probs,
        rewards=rewards,
        values=values,
        dones=dones,
        team_indices=team_indices,
        final_observations=np.array(session.observations),
        final_suffixes=np.array(session.suffix),
    )
