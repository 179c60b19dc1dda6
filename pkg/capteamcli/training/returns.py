from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from capteamcli.training.buffer import RolloutBuffer, ValueFn

ADVANTAGE_EPSILON = 1e-8


@dataclass(frozen=True)
class AdvantageEstimate:
    returns: np.ndarray
    advantages: np.ndarray
    raw_advantages: np.ndarray


def n_step_returns(
    rewards: np.ndarray,
    dones: np.ndarray,
    next_values: np.ndarray,
    n_step: int,
    gamma: float = 1.0,
) -> np.ndarray:
    """G_t = sum_k gamma^k r_{t+k} + gamma^n V(s_{t+n}), cut at the first done.

    ``next_values[t]`` is V(s_{t+1}); the last entry is the value of the state
    after the buffer and bootstraps every window that runs past the end.
    """
    length = rewards.shape[0]
    if next_values.shape != (length,):
        raise ValueError(
            f"need one bootstrap value per record, got {next_values.shape} for {length}"
        )
    returns = np.zeros(length)
    for t in range(length):
        total = 0.0
        discount = 1.0
        for k in range(n_step):
            index = t + k
            total += discount * rewards[index]
            discount *= gamma
            if dones[index]:
                break
            if k == n_step - 1 or index == length - 1:
                total += discount * next_values[index]
                break
        returns[t] = total
    return returns


def compute_advantages(
    buffer: RolloutBuffer,
    value_fn: ValueFn,
    n_step: int = 5,
    gamma: float = 1.0,
    normalize: bool = True,
) -> AdvantageEstimate:
    """n-step targets bootstrapped with ``value_fn`` and advantages against the
    values recorded at collection time."""
    states = np.concatenate([buffer.observations[1:], buffer.final_observations[None]])
    suffixes = np.concatenate([buffer.suffixes[1:], buffer.final_suffixes[None]])
    next_values = np.asarray(value_fn(states, suffixes), dtype=np.float64).reshape(-1)
    returns = n_step_returns(buffer.rewards, buffer.dones, next_values, n_step, gamma)
    raw = returns - buffer.values
    advantages = raw
    if normalize and raw.shape[0] > 1:
        advantages = (raw - raw.mean()) / (raw.std() + ADVANTAGE_EPSILON)
    return AdvantageEstimate(returns=returns, advantages=advantages, raw_advantages=raw)
