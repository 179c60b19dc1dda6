from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from capteamcli.nets.policies import NUM_ACTIONS, ActionDistribution
from capteamcli.tensorcore import RngStream


class SelectionMode(str, Enum):
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True)
class ActionSelection:
    actions: np.ndarray
    log_probs: Optional[np.ndarray] = None


def action_select(
    dist: ActionDistribution,
    mode: "str | SelectionMode",
    rng: Optional[RngStream] = None,
) -> ActionSelection:
    """Soft: one categorical draw per row. Hard: argmax, lowest index on ties."""
    logits = np.asarray(dist.logits)
    if logits.ndim != 2 or logits.shape[1] != NUM_ACTIONS:
        raise ValueError(f"logits must be N x {NUM_ACTIONS}, got {logits.shape}")
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits contain NaN or infinite values")
    mode = SelectionMode(mode)
    if mode is SelectionMode.HARD:
        return ActionSelection(np.argmax(logits, axis=1).astype(np.int64))
    if rng is None:
        raise ValueError("soft action selection needs an rng stream")
    cdf = np.cumsum(dist.probabilities, axis=1)
    draws = rng.generator.random(logits.shape[0])
    actions = np.minimum(
        (draws[:, None] >= cdf).sum(axis=1), NUM_ACTIONS - 1
    ).astype(np.int64)
    log_probs = dist.log_probabilities[np.arange(len(actions)), actions]
    return ActionSelection(actions, log_probs)
