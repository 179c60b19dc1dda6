"""Material transport and sensor network tasks for heterogeneous robot teams."""

from typing import Optional

from capteamcli.envs.base import (
    ACTION_NAMES,
    OBS_LAYOUT_VERSION,
    Environment,
    InvalidActionError,
    StepResult,
    full_observation,
    observation_suffix,
    validate_actions,
)
from capteamcli.envs.config import EnvConfig, HMTConfig, HSNConfig, Zone
from capteamcli.envs.hmt import (
    HMT_OBS_DIM,
    HMTEnv,
    HMTEventLog,
    HMTState,
    hmt_observations,
    hmt_observe,
    hmt_reset,
    hmt_step,
)
from capteamcli.envs.hsn import (
    HSN_OBS_DIM,
    HSNEnv,
    HSNState,
    PlacementError,
    hsn_observations,
    hsn_observe,
    hsn_pair_reward,
    hsn_reset,
    hsn_step,
    hsn_team_reward,
)
from capteamcli.envs.metrics import (
    connectivity_check,
    lens_area,
    min_pairwise_distance,
    pairwise_overlap,
)
from capteamcli.envs.safety import closest_approach, safety_filter
from capteamcli.envs.teams import (
    HMT_TRAINING_TABLE,
    HSN_TRAINING_TABLE,
    MAX_TEAM_SIZE,
    EnvKind,
    RobotSpec,
    TeamError,
    TeamSpec,
    make_training_teams,
    team_from_capabilities,
    training_pool,
    validate_team,
)


def obs_dim_for(env_kind: "str | EnvKind") -> int:
    return HMT_OBS_DIM if EnvKind.parse(env_kind) is EnvKind.HMT else HSN_OBS_DIM


def make_env(
    env_kind: "str | EnvKind", team: TeamSpec, config: Optional[EnvConfig] = None
) -> Environment:
    config = config or EnvConfig()
    if EnvKind.parse(env_kind) is EnvKind.HMT:
        return HMTEnv(team, config.hmt)
    return HSNEnv(team, config.hsn)


__all__ = [
    "ACTION_NAMES",
    "EnvConfig",
    "EnvKind",
    "Environment",
    "HMTConfig",
    "HMTEnv",
    "HMTEventLog",
    "HMTState",
    "HMT_OBS_DIM",
    "HMT_TRAINING_TABLE",
    "HSNConfig",
    "HSNEnv",
    "HSNState",
    "HSN_OBS_DIM",
    "HSN_TRAINING_TABLE",
    "InvalidActionError",
    "MAX_TEAM_SIZE",
    "OBS_LAYOUT_VERSION",
    "PlacementError",
    "RobotSpec",
    "StepResult",
    "TeamError",
    "TeamSpec",
    "Zone",
    "closest_approach",
    "connectivity_check",
    "full_observation",
    "hmt_observations",
    "hmt_observe",
    "hmt_reset",
    "hmt_step",
    "hsn_observations",
    "hsn_observe",
    "hsn_pair_reward",
    "hsn_reset",
    "hsn_step",
    "hsn_team_reward",
    "lens_area",
    "make_env",
    "make_training_teams",
    "min_pairwise_distance",
    "obs_dim_for",
    "observation_suffix",
    "pairwise_overlap",
    "safety_filter",
    "team_from_capabilities",
    "training_pool",
    "validate_actions",
    "validate_team",
]
