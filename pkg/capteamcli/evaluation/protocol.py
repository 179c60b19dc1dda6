from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from capteamcli.envs import EnvKind

EPISODE_COLUMNS = [
    "team_idx",
    "episode",
    "return",
    "steps",
    "quota_filled",
    "pct_lumber_rem",
    "pct_concrete_rem",
    "overlap",
    "connected_end",
]
EXTENDED_TEAM_SIZES = (8, 10, 15)


class UnsupportedVariantError(ValueError):
    """Raised when a policy variant cannot act for the requested robots."""


class EvalAxis(str, Enum):
    TRAIN = "train"
    COMPOSITION = "composition"
    NEW_ROBOTS = "new-robots"

    @classmethod
    def parse(cls, value: "str | EvalAxis") -> "EvalAxis":
        if isinstance(value, EvalAxis):
            return value
        text = str(value).strip().lower().replace("_", "-")
        aliases = {"training-set": "train", "new-composition": "composition"}
        try:
            return cls(aliases.get(text, text))
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise ValueError(f"unknown eval axis {value!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class EvalProtocol:
    axis: EvalAxis = EvalAxis.COMPOSITION
    team_sizes: Tuple[int, ...] = (3, 4, 5)
    teams_per_setting: int = 100
    episodes_per_team: int = 10
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "axis", EvalAxis.parse(self.axis))
        object.__setattr__(self, "team_sizes", tuple(int(s) for s in self.team_sizes))
        if not self.team_sizes or any(s < 1 for s in self.team_sizes):
            raise ValueError(f"team_sizes must be >= 1, got {list(self.team_sizes)}")
        for name in ("teams_per_setting", "episodes_per_team", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class EpisodeMetrics:
    team_idx: int
    episode: int
    episode_return: float
    steps: int
    quota_filled: Optional[bool] = None
    pct_lumber_rem: Optional[float] = None
    pct_concrete_rem: Optional[float] = None
    overlap: Optional[float] = None
    overlap_end: Optional[float] = None
    connected_end: Optional[bool] = None
    # Per-step indicators: quota already filled (HMT) or graph connected (HSN).
    step_flags: Tuple[bool, ...] = ()

    def row(self) -> Dict[str, Any]:
        return {
            "team_idx": self.team_idx,
            "episode": self.episode,
            "return": self.episode_return,
            "steps": self.steps,
            "quota_filled": self.quota_filled,
            "pct_lumber_rem": self.pct_lumber_rem,
            "pct_concrete_rem": self.pct_concrete_rem,
            "overlap": self.overlap,
            "connected_end": self.connected_end,
        }


def _by_step_curve(episodes: Sequence[EpisodeMetrics], horizon: int) -> List[float]:
    """Percent of episodes whose flag is set at each step 1..horizon.

    A finished episode keeps its final flag for the remaining steps.
    """
    if not episodes:
        return []
    flags = np.zeros((len(episodes), horizon), dtype=bool)
    for row, episode in enumerate(episodes):
        taken = np.asarray(episode.step_flags[:horizon], dtype=bool)
        flags[row, : taken.size] = taken
        if taken.size and taken.size < horizon:
            flags[row, taken.size :] = taken[-1]
    return (100.0 * flags.mean(axis=0)).tolist()


def _mean_std(frame: pd.DataFrame, column: str) -> Optional[Dict[str, float]]:
    values = pd.to_numeric(frame[column], errors="coerce").dropna()
    if values.empty:
        return None
    return {"mean": float(values.mean()), "std": float(values.std(ddof=0))}


@dataclass
class MetricsReport:
    env_kind: EnvKind
    variant: str
    setting: str
    horizon: int
    episodes: List[EpisodeMetrics] = field(default_factory=list)

    @property
    def num_episodes(self) -> int:
        return len(self.episodes)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([e.row() for e in self.episodes], columns=EPISODE_COLUMNS)
        if self.env_kind is EnvKind.HMT:
            frame["quota_filled"] = frame["quota_filled"].astype(int)
        else:
            frame["connected_end"] = frame["connected_end"].astype(int)
        return frame

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    def _extra_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "overlap_end": [e.overlap_end for e in self.episodes],
                "connected_end": [
                    None if e.connected_end is None else float(e.connected_end)
                    for e in self.episodes
                ],
                "quota_filled": [
                    None if e.quota_filled is None else float(e.quota_filled)
                    for e in self.episodes
                ],
            }
        )

    def summary(self) -> Dict[str, Any]:
        frame = self.to_frame()
        extra = self._extra_frame()
        out: Dict[str, Any] = {
            "env": self.env_kind.value,
            "variant": self.variant,
            "setting": self.setting,
            "episodes": self.num_episodes,
            "avg_return": _mean_std(frame, "return"),
        }
        curve = _by_step_curve(self.episodes, self.horizon)
        if self.env_kind is EnvKind.HMT:
            out["avg_steps"] = _mean_std(frame, "steps")
            out["pct_lumber_remaining"] = _mean_std(frame, "pct_lumber_rem")
            out["pct_concrete_remaining"] = _mean_std(frame, "pct_concrete_rem")
            filled = _mean_std(extra, "quota_filled")
            out["pct_quota_filled"] = None if filled is None else 100.0 * filled["mean"]
            out["pct_quota_filled_by_step"] = curve
        else:
            out["pairwise_overlap"] = _mean_std(frame, "overlap")
            out["pairwise_overlap_end"] = _mean_std(extra, "overlap_end")
            connected = _mean_std(extra, "connected_end")
            out["pct_fully_connected_end"] = (
                None if connected is None else 100.0 * connected["mean"]
            )
            out["pct_fully_connected_by_step"] = curve
        return _finite(out)


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    return value
