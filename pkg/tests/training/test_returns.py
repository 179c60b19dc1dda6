import math

import numpy as np
import pytest

from capteamcli.nets import ActionDistribution
from capteamcli.tensorcore import VERIFICATION_DTYPE, Tape
from capteamcli.training import (
    RolloutBuffer,
    categorical_entropy,
    clipped_surrogate,
    compute_advantages,
    n_step_returns,
)
from capteamcli.training.ppo import log_softmax

pytestmark = pytest.mark.unit


def _reference(rewards, dones, next_values, n, gamma):
    out = []
    for t in range(len(rewards)):
        total, discount = 0.0, 1.0
        for k in range(n):
            total += discount * rewards[t + k]
            discount *= gamma
            if dones[t + k]:
                break
            if k == n - 1 or t + k == len(rewards) - 1:
                total += discount * next_values[t + k]
                break
        out.append(total)
    return np.array(out)


def test_window_stops_at_the_first_done():
    rewards = np.arange(1.0, 9.0) / 4
    dones = np.zeros(8, dtype=bool)
    dones[3] = True
    next_values = np.full(8, 10.0)
    returns = n_step_returns(rewards, dones, next_values, n_step=5)
    assert returns[0] == pytest.approx(sum(rewards[:4]))
    assert returns[3] == pytest.approx(rewards[3])
    assert returns[4] == pytest.approx(sum(rewards[4:8]) + 10.0)
    np.testing.assert_array_equal(
        returns, _reference(rewards, dones, next_values, 5, 1.0)
    )


def test_discounted_returns_match_brute_force(generator):
    rewards = generator.normal(size=20)
    dones = generator.random(20) < 0.15
    next_values = generator.normal(size=20)
    np.testing.assert_allclose(
        n_step_returns(rewards, dones, next_values, 5, gamma=0.9),
        _reference(rewards, dones, next_values, 5, 0.9),
        atol=1e-12,
    )


def test_bootstrap_values_must_align():
    with pytest.raises(ValueError, match="bootstrap"):
        n_step_returns(np.zeros(4), np.zeros(4, dtype=bool), np.zeros(3), 5)


def _single_step_buffer(reward, done, value=0.0):
    return RolloutBuffer(
        observations=np.zeros((1, 2, 2)),
        suffixes=np.zeros((1, 2, 1)),
        actions=np.zeros((1, 2), dtype=np.int64),
        log_probs=np.zeros((1, 2)),
        rewards=np.array([reward]),
        values=np.array([value]),
        dones=np.array([done]),
        team_indices=np.zeros(1, dtype=np.int64),
        final_observations=np.zeros((2, 2)),
        final_suffixes=np.zeros((2, 1)),
    )


def test_terminal_step_return_is_its_reward():
    estimate = compute_advantages(
        _single_step_buffer(1.0, True, value=0.25),
        lambda obs, suffix: np.full(obs.shape[0], 99.0),
        normalize=False,
    )
    np.testing.assert_array_equal(estimate.returns, [1.0])
    np.testing.assert_array_equal(estimate.advantages, [0.75])


def test_open_step_bootstraps_from_the_value_function():
    estimate = compute_advantages(
        _single_step_buffer(1.0, False),
        lambda obs, suffix: np.full(obs.shape[0], 2.0),
    )
    np.testing.assert_array_equal(estimate.returns, [3.0])


def test_clipped_surrogate():
    np.testing.assert_allclose(clipped_surrogate(np.array([1.5]), np.array([1.0]), 0.2), [1.2])
    np.testing.assert_allclose(
        clipped_surrogate(np.array([0.5]), np.array([-1.0]), 0.2), [-0.8]
    )
    np.testing.assert_allclose(clipped_surrogate(np.array([1.1]), np.array([2.0]), 0.2), [2.2])


def test_entropy_bounds():
    assert categorical_entropy(np.full(5, 0.2)) == pytest.approx(math.log(5))
    assert categorical_entropy(np.array([1.0, 0, 0, 0, 0])) == 0.0


def test_tape_log_softmax_matches_numpy(generator):
    logits = generator.normal(size=(6, 5)) * 3
    tape = Tape(VERIFICATION_DTYPE)
    result = log_softmax(tape, tape.constant(logits))
    np.testing.assert_allclose(
        result.data, ActionDistribution(logits).log_probabilities, atol=1e-12
    )
