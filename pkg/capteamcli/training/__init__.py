"""PPO with a centralized critic, parameter sharing and team rotation."""

from capteamcli.training.buffer import (
    EpisodeRecord,
    EpisodeSession,
    RolloutBuffer,
    TeamScheduler,
    collect_rollout,
    critic_value_fn,
)
from capteamcli.training.config import DEFAULT_TOTAL_ENV_STEPS, TrainConfig
from capteamcli.training.ppo import (
    LearnerState,
    TrainingDivergedError,
    UpdateLosses,
    categorical_entropy,
    clipped_surrogate,
    ppo_update,
)
from capteamcli.training.returns import (
    AdvantageEstimate,
    compute_advantages,
    n_step_returns,
)
from capteamcli.training.trainer import (
    TRAIN_LOG_COLUMNS,
    TrainLog,
    TrainRecord,
    TrainResult,
    build_networks,
    train,
)

__all__ = [
    "AdvantageEstimate",
    "DEFAULT_TOTAL_ENV_STEPS",
    "EpisodeRecord",
    "EpisodeSession",
    "LearnerState",
    "RolloutBuffer",
    "TRAIN_LOG_COLUMNS",
    "TeamScheduler",
    "TrainConfig",
    "TrainLog",
    "TrainRecord",
    "TrainResult",
    "TrainingDivergedError",
    "UpdateLosses",
    "build_networks",
    "categorical_entropy",
    "clipped_surrogate",
    "collect_rollout",
    "compute_advantages",
    "critic_value_fn",
    "n_step_returns",
    "ppo_update",
    "train",
]
