from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence

import numpy as np

from capteamcli.envs import (
    EnvConfig,
    EnvKind,
    TeamSpec,
    make_env,
    make_training_teams,
    observation_suffix,
    training_pool,
    validate_team,
)
from capteamcli.evaluation.protocol import (
    EpisodeMetrics,
    EvalAxis,
    EvalProtocol,
    MetricsReport,
    UnsupportedVariantError,
)
from capteamcli.evaluation.samplers import (
    sample_composition_teams,
    sample_new_robot_teams,
)
from capteamcli.nets import Policy, SelectionMode, action_select, policy_forward, team_batch
from capteamcli.tensorcore import RngStream, Tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalSetting:
    name: str
    axis: EvalAxis
    team_size: int
    teams: List[TeamSpec]


def build_settings(
    protocol: EvalProtocol, env_kind: "str | EnvKind", rng: RngStream
) -> List[EvalSetting]:
    """Teams for every (axis, size) setting, drawn from ``rng`` only.

    All variants evaluated with the same seed see the same teams.
    """
    kind = EnvKind.parse(env_kind)
    if protocol.axis is EvalAxis.TRAIN:
        teams = make_training_teams(kind)
        return [EvalSetting("train-4", EvalAxis.TRAIN, teams[0].size, teams)]
    settings = []
    for size in protocol.team_sizes:
        stream = rng.split(f"{protocol.axis.value}-{size}")
        if protocol.axis is EvalAxis.COMPOSITION:
            teams = sample_composition_teams(
                training_pool(kind), size, protocol.teams_per_setting, stream
            )
        else:
            teams = sample_new_robot_teams(kind, size, protocol.teams_per_setting, stream)
        settings.append(
            EvalSetting(f"{protocol.axis.value}-{size}", protocol.axis, size, teams)
        )
    return settings


def check_variant_supports(policy: Policy, teams: Sequence[TeamSpec]) -> None:
    if not policy.variant.uses_ids:
        return
    missing = [team.name for team in teams if not team.has_ids]
    if missing:
        raise UnsupportedVariantError(
            f"{policy.variant.value} identifies robots by training-pool id; "
            f"{len(missing)} team(s) contain robots without one (first: {missing[0]!r}). "
            f"Use a capability-aware variant for new robots."
        )


def run_episode(
    policy: Policy,
    params: Mapping[str, Tensor],
    env_kind: EnvKind,
    team: TeamSpec,
    env_config: EnvConfig,
    rng: RngStream,
    team_idx: int,
    episode: int,
) -> EpisodeMetrics:
    env = make_env(env_kind, team, env_config)
    observations = env.reset(team, rng)
    suffix = observation_suffix(team, policy.variant)
    total = 0.0
    flags: List[bool] = []
    overlaps: List[float] = []
    info: Mapping = {}
    done = False
    while not done:
        dist = policy_forward(policy, params, team_batch(policy.variant, observations, suffix))
        actions = action_select(dist, SelectionMode.HARD).actions
        result = env.step(actions)
        total += result.reward
        observations = result.observations
        done = result.done
        info = result.info
        if env_kind is EnvKind.HMT:
            flags.append(bool(info["quota_filled"]))
        else:
            flags.append(bool(info["connected"]))
            overlaps.append(float(info["overlap"]))

    steps = int(info["step"])
    if env_kind is EnvKind.HMT:
        quota = np.asarray(info["quota"], dtype=np.float64)
        delivered = np.asarray(info["delivered"], dtype=np.float64)
        remaining = 100.0 * np.maximum(0.0, quota - delivered) / np.where(quota > 0, quota, 1.0)
        return EpisodeMetrics(
            team_idx=team_idx,
            episode=episode,
            episode_return=total,
            steps=steps,
            quota_filled=bool(info["quota_filled"]),
            pct_lumber_rem=float(remaining[0]),
            pct_concrete_rem=float(remaining[1]),
            step_flags=tuple(flags),
        )
    return EpisodeMetrics(
        team_idx=team_idx,
        episode=episode,
        episode_return=total,
        steps=steps,
        overlap=float(np.mean(overlaps)),
        overlap_end=overlaps[-1],
        connected_end=flags[-1],
        step_flags=tuple(flags),
    )


def evaluate(
    policy: Policy,
    params: Mapping[str, Tensor],
    env_kind: "str | EnvKind",
    teams: Sequence[TeamSpec],
    episodes_per_team: int = 10,
    rng: Optional[RngStream] = None,
    env_config: Optional[EnvConfig] = None,
    setting: str = "custom",
    workers: int = 1,
) -> MetricsReport:
    """Hard-action rollouts of ``params`` on every team, ``episodes_per_team`` each.

    Each team draws from its own stream, so results do not depend on
    ``workers``; records are ordered by team then episode.
    """
    kind = EnvKind.parse(env_kind)
    env_config = env_config or EnvConfig()
    rng = rng or RngStream(0)
    if episodes_per_team < 1:
        raise ValueError(f"episodes_per_team must be >= 1, got {episodes_per_team}")
    for team in teams:
        validate_team(kind, team)
    check_variant_supports(policy, teams)

    def run_team(team_idx: int) -> List[EpisodeMetrics]:
        team_stream = rng.split(f"team-{team_idx}")
        return [
            run_episode(
                policy,
                params,
                kind,
                teams[team_idx],
                env_config,
                team_stream.split(f"episode-{e}"),
                team_idx,
                e,
            )
            for e in range(episodes_per_team)
        ]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_team = list(pool.map(run_team, range(len(teams))))
    else:
        per_team = [run_team(i) for i in range(len(teams))]

    horizon = env_config.hmt.horizon if kind is EnvKind.HMT else env_config.hsn.horizon
    report = MetricsReport(
        env_kind=kind,
        variant=policy.variant.value,
        setting=setting,
        horizon=horizon,
        episodes=[record for team_records in per_team for record in team_records],
    )
    logger.info(
        "evaluated %s on %s: %d teams x %d episodes",
        policy.variant.value,
        setting,
        len(teams),
        episodes_per_team,
    )
    return report


def run_protocol(
    policy: Policy,
    params: Mapping[str, Tensor],
    env_kind: "str | EnvKind",
    protocol: EvalProtocol,
    rng: RngStream,
    env_config: Optional[EnvConfig] = None,
) -> List[MetricsReport]:
    """Evaluate every setting; teams and episodes use separate streams."""
    settings = build_settings(protocol, env_kind, rng.split("teams"))
    episodes_rng = rng.split("episodes")
    return [
        evaluate(
            policy,
            params,
            env_kind,
            setting.teams,
            protocol.episodes_per_team,
            episodes_rng.split(setting.name),
            env_config,
            setting.name,
            protocol.workers,
        )
        for setting in settings
    ]
