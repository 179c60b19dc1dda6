"""Clipped-surrogate PPO over a shared policy and a centralized critic."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

import numpy as np

from capteamcli.nets import NUM_ACTIONS, Critic, GraphBatch, Policy, team_batch
from capteamcli.tensorcore import AdamState, GradientError, Tape, Tensor, adam_step
from capteamcli.training.buffer import RolloutBuffer
from capteamcli.training.config import TrainConfig
from capteamcli.training.returns import AdvantageEstimate

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    """Raised when a loss or gradient stops being finite."""


@dataclass(frozen=True)
class UpdateLosses:
    policy_loss: float
    value_loss: float
    entropy: float


@dataclass
class LearnerState:
    """Parameters and optimizer moments for both networks."""

    policy_params: Dict[str, Tensor]
    critic_params: Dict[str, Tensor]
    policy_optim: AdamState
    critic_optim: AdamState

    @classmethod
    def fresh(
        cls, policy_params: Dict[str, Tensor], critic_params: Dict[str, Tensor]
    ) -> "LearnerState":
        return cls(
            policy_params,
            critic_params,
            AdamState.for_params(policy_params),
            AdamState.for_params(critic_params),
        )


def clipped_surrogate(
    ratio: np.ndarray, advantages: np.ndarray, clip: float
) -> np.ndarray:
    """Per-sample min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)."""
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip)
    return np.minimum(ratio * advantages, clipped * advantages)


def categorical_entropy(probabilities: np.ndarray) -> np.ndarray:
    p = np.asarray(probabilities, dtype=np.float64)
    safe = np.where(p > 0, p, 1.0)
    return -np.sum(p * np.log(safe), axis=-1)


def log_softmax(tape: Tape, logits: Tensor) -> Tensor:
    """Row-wise log-softmax from exp/log and two matmuls against ones."""
    rows, width = logits.shape
    peak = np.max(logits.data, axis=1, keepdims=True)
    z = tape.shift(logits, -np.broadcast_to(peak, (rows, width)))
    partition = tape.matmul(tape.exp(z), tape.constant(np.ones((width, 1))))
    spread = tape.matmul(tape.log(partition), tape.constant(np.ones((1, width))))
    return tape.add(z, tape.scale(spread, -1.0))


def flatten_buffer(buffer: RolloutBuffer, variant) -> GraphBatch:
    """Every robot at every step as one batch of disjoint team graphs."""
    return GraphBatch.stack(
        [
            team_batch(variant, buffer.observations[t], buffer.suffixes[t])
            for t in range(len(buffer))
        ]
    )


def policy_loss_on_tape(
    tape: Tape,
    policy: Policy,
    params: Mapping[str, Tensor],
    batch: GraphBatch,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    config: TrainConfig,
) -> Tuple[Tensor, float, float]:
    """Returns (loss tensor, mean clipped surrogate, mean entropy)."""
    logits = policy.forward(tape, params, batch)
    log_probs = log_softmax(tape, logits)
    rows = actions.shape[0]
    taken = np.zeros((rows, NUM_ACTIONS))
    taken[np.arange(rows), actions] = 1.0
    new_log_probs = tape.sum(tape.mul(log_probs, tape.constant(taken)), axis=1)
    ratio = tape.exp(tape.shift(new_log_probs, -old_log_probs))

    # Where the clipped branch is the minimum its value is constant in theta.
    rho = ratio.data.astype(np.float64)
    clipped = np.clip(rho, 1.0 - config.clip, 1.0 + config.clip)
    use_ratio = rho * advantages <= clipped * advantages
    surrogate = tape.shift(
        tape.mul(ratio, tape.constant(np.where(use_ratio, advantages, 0.0))),
        np.where(use_ratio, 0.0, clipped * advantages),
    )
    objective = tape.mean(surrogate)

    probabilities = tape.exp(log_probs)
    entropy = tape.scale(
        tape.mean(tape.sum(tape.mul(probabilities, log_probs), axis=1)), -1.0
    )
    loss = tape.add(
        tape.scale(objective, -1.0), tape.scale(entropy, -config.entropy_coef)
    )
    return loss, objective.item(), entropy.item()


def value_loss_on_tape(
    tape: Tape,
    critic: Critic,
    params: Mapping[str, Tensor],
    buffer: RolloutBuffer,
    returns: np.ndarray,
) -> Tensor:
    values = critic.forward(tape, params, buffer.observations, buffer.suffixes)
    error = tape.shift(values, -returns.reshape(-1, 1))
    return tape.mean(tape.mul(error, error))


def _gradients(tape: Tape, loss: Tensor, params: Mapping[str, Tensor]):
    tape.backward(loss)
    return {name: param.grad for name, param in params.items()}


def _check_finite(label: str, value: float, update: int, team: str) -> None:
    if not np.isfinite(value):
        raise TrainingDivergedError(
            f"{label} became {value} at update {update} on team {team!r}; "
            f"try a smaller learning rate"
        )


def ppo_update(
    policy: Policy,
    critic: Critic,
    learner: LearnerState,
    buffer: RolloutBuffer,
    estimate: AdvantageEstimate,
    config: TrainConfig,
    update: int = 0,
    team: str = "",
) -> UpdateLosses:
    """Run ``config.epochs`` full-batch passes; mutates ``learner`` in place.

    Robot samples are flattened into one batch so the single parameter set
    is trained on every robot of every step.
    """
    batch = flatten_buffer(buffer, policy.variant)
    actions = buffer.actions.reshape(-1)
    old_log_probs = buffer.log_probs.reshape(-1)
    # Team advantage, shared by every robot of that step.
    advantages = np.repeat(estimate.advantages, buffer.team_size)

    history: List[UpdateLosses] = []
    for epoch in range(config.epochs):
        policy_tape = Tape(next(iter(learner.policy_params.values())).dtype)
        loss, objective, entropy = policy_loss_on_tape(
            policy_tape,
            policy,
            learner.policy_params,
            batch,
            actions,
            old_log_probs,
            advantages,
            config,
        )
        _check_finite("policy loss", loss.item(), update, team)
        critic_tape = Tape(next(iter(learner.critic_params.values())).dtype)
        value_loss = value_loss_on_tape(
            critic_tape, critic, learner.critic_params, buffer, estimate.returns
        )
        _check_finite("value loss", value_loss.item(), update, team)

        try:
            learner.policy_params, learner.policy_optim = adam_step(
                learner.policy_params,
                _gradients(policy_tape, loss, learner.policy_params),
                learner.policy_optim,
                config.lr,
            )
            learner.critic_params, learner.critic_optim = adam_step(
                learner.critic_params,
                _gradients(critic_tape, value_loss, learner.critic_params),
                learner.critic_optim,
                config.lr,
            )
        except GradientError as error:
            raise TrainingDivergedError(
                f"parameter update failed at update {update}, epoch {epoch} "
                f"on team {team!r}: {error}"
            ) from error
        history.append(UpdateLosses(loss.item(), value_loss.item(), entropy))
        logger.debug(
            "update %d epoch %d: policy=%.5f surrogate=%.5f value=%.5f entropy=%.4f",
            update,
            epoch,
            loss.item(),
            objective,
            value_loss.item(),
            entropy,
        )
    return history[-1]
