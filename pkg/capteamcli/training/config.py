from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from capteamcli.envs.teams import EnvKind
from capteamcli.tensorcore import DEFAULT_LR

DEFAULT_TOTAL_ENV_STEPS = {EnvKind.HMT: 40_000_000, EnvKind.HSN: 20_000_000}


@dataclass(frozen=True)
class TrainConfig:
    """PPO hyperparameters and the environment step budget."""

    lr: float = DEFAULT_LR
    entropy_coef: float = 0.01
    epochs: int = 4
    clip: float = 0.2
    n_step: int = 5
    buffer_length: int = 64
    critic_refresh_interval: int = 200
    # None selects the per-environment default from DEFAULT_TOTAL_ENV_STEPS.
    total_env_steps: Optional[int] = None
    resample_every_episodes: int = 10
    gamma: float = 1.0
    normalize_advantages: bool = True
    checkpoint_interval: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "lr",
            "clip",
            "epochs",
            "n_step",
            "buffer_length",
            "critic_refresh_interval",
            "resample_every_episodes",
        ):
            value = getattr(self, name)
            if isinstance(value, bool) or not value > 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")
        if self.entropy_coef < 0:
            raise ValueError(f"entropy_coef must be >= 0, got {self.entropy_coef!r}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        for name in ("total_env_steps", "checkpoint_interval"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be > 0 when set, got {value!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed!r}")

    def resolved_total_steps(self, env_kind: "str | EnvKind") -> int:
        if self.total_env_steps is not None:
            return self.total_env_steps
        return DEFAULT_TOTAL_ENV_STEPS[EnvKind.parse(env_kind)]
