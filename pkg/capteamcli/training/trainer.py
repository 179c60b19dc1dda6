from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from capteamcli.envs import EnvKind, Environment, TeamSpec, validate_team
from capteamcli.nets import Critic, Policy, PolicyVariant
from capteamcli.tensorcore import RngStream, Tensor
from capteamcli.training.buffer import (
    EpisodeRecord,
    EpisodeSession,
    TeamScheduler,
    collect_rollout,
    critic_value_fn,
)
from capteamcli.training.config import TrainConfig
from capteamcli.training.ppo import LearnerState, ppo_update
from capteamcli.training.returns import compute_advantages

logger = logging.getLogger(__name__)

TRAIN_LOG_COLUMNS = [
    "update",
    "env_steps",
    "team",
    "mean_return",
    "policy_loss",
    "value_loss",
    "entropy",
]
# Episodes averaged into each log row's mean_return.
RETURN_WINDOW = 100

EnvFactory = Callable[[TeamSpec], Environment]
CheckpointHook = Callable[[int, "LearnerState"], None]


@dataclass(frozen=True)
class TrainRecord:
    update: int
    env_steps: int
    team: str
    mean_return: float
    policy_loss: float
    value_loss: float
    entropy: float


@dataclass
class TrainLog:
    records: List[TrainRecord] = field(default_factory=list)

    def append(self, record: TrainRecord) -> None:
        if self.records and record.env_steps <= self.records[-1].env_steps:
            raise ValueError(
                f"env_steps must increase: {record.env_steps} after "
                f"{self.records[-1].env_steps}"
            )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [asdict(r) for r in self.records], columns=TRAIN_LOG_COLUMNS
        )

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        # repr-exact floats keep two identical runs byte-identical
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path


@dataclass
class TrainResult:
    policy: Policy
    critic: Critic
    learner: LearnerState
    log: TrainLog
    episodes: List[EpisodeRecord]
    env_steps: int

    @property
    def policy_params(self) -> Dict[str, Tensor]:
        return self.learner.policy_params

    @property
    def episode_returns(self) -> List[float]:
        return [e.episode_return for e in self.episodes]


def build_networks(
    env_kind: "str | EnvKind",
    variant: "str | PolicyVariant",
    team_size: int,
    obs_dim: int,
):
    kind = EnvKind.parse(env_kind)
    variant = PolicyVariant.parse(variant)
    policy = Policy(variant, obs_dim, kind.capability_dim)
    critic = Critic(variant, team_size, obs_dim, policy.suffix_dim)
    return policy, critic


def _mean_recent(episodes: Sequence[EpisodeRecord]) -> float:
    recent = episodes[-RETURN_WINDOW:]
    if not recent:
        return math.nan
    return float(np.mean([e.episode_return for e in recent]))


def train(
    env_factory: EnvFactory,
    env_kind: "str | EnvKind",
    variant: "str | PolicyVariant",
    teams: Sequence[TeamSpec],
    config: TrainConfig = TrainConfig(),
    rng: Optional[RngStream] = None,
    checkpoint_hook: Optional[CheckpointHook] = None,
) -> TrainResult:
    """Train one shared policy on ``teams`` with PPO.

    Teams rotate round-robin every ``config.resample_every_episodes`` finished
    episodes. Bootstrap values come from a frozen critic copy refreshed every
    ``config.critic_refresh_interval`` env steps (checked between buffers).
    Runs whole buffers until at least the total step budget is reached.
    """
    kind = EnvKind.parse(env_kind)
    variant = PolicyVariant.parse(variant)
    if not teams:
        raise ValueError("at least one training team is required")
    for team in teams:
        validate_team(kind, team)
        if variant.uses_ids and not team.has_ids:
            raise ValueError(
                f"{variant.value} needs robot ids but team {team.name!r} has none"
            )
    rng = rng or RngStream(config.seed)
    total = config.resolved_total_steps(kind)

    scheduler = TeamScheduler(teams, config.resample_every_episodes)
    env = env_factory(scheduler.current)
    policy, critic = build_networks(kind, variant, scheduler.current.size, env.obs_dim)
    learner = LearnerState.fresh(
        policy.init_params(rng.split("init/policy")),
        critic.init_params(rng.split("init/critic")),
    )
    session = EpisodeSession(env, scheduler, variant.value, rng.split("episodes"))
    actions_rng = rng.split("actions")
    bootstrap_params = learner.critic_params
    last_refresh = 0
    last_checkpoint = 0
    env_steps = 0
    update = 0
    log = TrainLog()
    logger.info(
        "training %s on %s: %d team(s) of %d, %d env steps",
        variant.value,
        kind.value,
        len(teams),
        scheduler.current.size,
        total,
    )

    while env_steps < total:
        team_name = scheduler.current.name
        buffer = collect_rollout(
            session,
            policy,
            learner.policy_params,
            critic,
            learner.critic_params,
            config.buffer_length,
            actions_rng,
        )
        env_steps += len(buffer)
        estimate = compute_advantages(
            buffer,
            critic_value_fn(critic, bootstrap_params),
            n_step=config.n_step,
            gamma=config.gamma,
            normalize=config.normalize_advantages,
        )
        losses = ppo_update(
            policy, critic, learner, buffer, estimate, config, update, team_name
        )
        update += 1
        log.append(
            TrainRecord(
                update=update,
                env_steps=env_steps,
                team=team_name,
                mean_return=_mean_recent(session.episodes),
                policy_loss=losses.policy_loss,
                value_loss=losses.value_loss,
                entropy=losses.entropy,
            )
        )
        if env_steps - last_refresh >= config.critic_refresh_interval:
            bootstrap_params = learner.critic_params
            last_refresh = env_steps
        if (
            checkpoint_hook is not None
            and config.checkpoint_interval is not None
            and env_steps - last_checkpoint >= config.checkpoint_interval
        ):
            checkpoint_hook(env_steps, learner)
            last_checkpoint = env_steps
        if update % 50 == 0:
            logger.info(
                "update %d: %d/%d steps, mean return %.3f, entropy %.3f",
                update,
                env_steps,
                total,
                log.records[-1].mean_return,
                losses.entropy,
            )

    logger.info(
        "training finished after %d updates, %d episodes", update, len(session.episodes)
    )
    return TrainResult(policy, critic, learner, log, session.episodes, env_steps)
