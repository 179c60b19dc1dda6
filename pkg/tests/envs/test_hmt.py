import numpy as np
import pytest

from capteamcli.envs import (
    HMT_OBS_DIM,
    HMTConfig,
    HMTState,
    hmt_reset,
    hmt_step,
    make_env,
    make_training_teams,
    obs_dim_for,
    team_from_capabilities,
)
from capteamcli.tensorcore import RngStream

pytestmark = pytest.mark.unit

STOP = 4
LUMBER_HAULER = team_from_capabilities([[1.0, 0.0]])


def _state(position, carried=(0.0, 0.0), quota=(1.0, 1.0), delivered=(0.0, 0.0)):
    return HMTState(
        positions=np.array([position], dtype=float),
        velocities=np.zeros((1, 2)),
        carried=np.array([carried], dtype=float),
        quota=np.array(quota, dtype=float),
        delivered=np.array(delivered, dtype=float),
    )


def test_pickup_at_the_depot():
    state, result = hmt_step(_state((-0.8, 0.6)), [STOP], LUMBER_HAULER)
    assert result.reward == pytest.approx(0.25 - 0.005)
    np.testing.assert_allclose(state.carried, [[1.0, 0.0]])
    assert result.info["events"].pickups == 1


def test_no_pickup_of_a_material_the_robot_cannot_carry():
    state, result = hmt_step(_state((-0.8, -0.6)), [STOP], LUMBER_HAULER)
    assert result.reward == pytest.approx(-0.005)
    np.testing.assert_array_equal(state.carried, [[0.0, 0.0]])


def test_dropoff_at_the_site():
    state, result = hmt_step(_state((0.8, 0.0), carried=(1.0, 0.0)), [STOP], LUMBER_HAULER)
    assert result.reward == pytest.approx(0.75 - 0.005)
    np.testing.assert_allclose(result.info["delivered"], [1.0, 0.0])
    assert not result.info["quota_filled"]
    assert not result.done


def test_surplus_is_penalized_and_filling_ends_the_episode():
    start = _state((0.8, 0.0), carried=(1.0, 0.0), delivered=(0.8, 1.0))
    state, result = hmt_step(start, [STOP], LUMBER_HAULER)
    assert result.reward == pytest.approx(0.75 - 0.1 * 0.8)
    assert result.info["quota_filled"] and result.done
    assert state.quota_filled_step == 1
    assert result.info["events"].unfilled_robot_steps == 0


def test_partial_remaining_quota_worked_example():
    # 0.3 of the lumber quota left, 1.0 delivered: +0.75 - 0.10 * 0.7, then time.
    start = _state((0.8, 0.0), carried=(1.0, 0.0), delivered=(0.7, 0.0))
    state, result = hmt_step(start, [STOP], LUMBER_HAULER)
    assert result.reward == pytest.approx(0.68 - 0.005)
    assert result.info["events"].valid_dropoffs == 1
    assert result.info["events"].surplus_total == pytest.approx(0.7)
    np.testing.assert_allclose(state.delivered, [1.7, 0.0])
    assert not result.done


def test_fractional_capacities_meet_integer_quotas():
    team = team_from_capabilities([[0.7, 0.0], [0.3, 0.0]])
    start = HMTState(
        positions=np.array([[0.8, 0.0], [0.9, 0.1]]),
        velocities=np.zeros((2, 2)),
        carried=np.array([[0.7, 0.0], [0.3, 0.0]]),
        quota=np.array([1.0, 0.0]),
        delivered=np.zeros(2),
    )
    _, result = hmt_step(start, [STOP, STOP], team)
    assert result.info["quota_filled"]


def test_reset_draws_quota_and_starts_at_the_site():
    config = HMTConfig()
    team = make_training_teams("hmt")[0]
    for seed in range(20):
        state, obs = hmt_reset(team, RngStream(seed), config)
        assert obs.shape == (4, HMT_OBS_DIM)
        assert ((state.quota >= 2) & (state.quota <= 8)).all()
        assert config.construction_site.contains(state.positions).all()
    fixed, _ = hmt_reset(team, RngStream(0), HMTConfig(fixed_quota=(3, 5)))
    np.testing.assert_array_equal(fixed.quota, [3.0, 5.0])


def test_observation_layout():
    team = make_training_teams("hmt")[1]
    state, obs = hmt_reset(team, RngStream(3), HMTConfig(fixed_quota=(2, 4)))
    np.testing.assert_allclose(obs[:, :2], state.positions)
    np.testing.assert_array_equal(obs[:, 2:6], 0.0)
    np.testing.assert_array_equal(obs[:, 9:], [[2.0, 4.0, 0.0, 0.0]] * 4)
    assert obs_dim_for("hmt") == HMT_OBS_DIM


def test_idle_team_pays_the_time_penalty_until_the_horizon():
    team = make_training_teams("hmt")[2]
    env = make_env("hmt", team)
    env.reset(team, RngStream(0))
    total, steps, done = 0.0, 0, False
    while not done:
        result = env.step([STOP] * 4)
        total += result.reward
        steps += 1
        done = result.done
    assert steps == 500
    assert total == pytest.approx(-0.005 * 4 * 500)


def test_rewards_reconstruct_from_the_event_log(generator):
    team = make_training_teams("hmt")[4]
    config = HMTConfig(horizon=150)
    for episode in range(3):
        state, _ = hmt_reset(team, RngStream(episode), config)
        total, done = 0.0, False
        while not done:
            state, result = hmt_step(state, generator.integers(0, 5, size=4), team, config)
            total += result.reward
            done = result.done
        assert total == pytest.approx(
            state.events.reconstructed_reward(config), abs=1e-9
        )


def test_material_is_conserved_every_step(generator):
    team = make_training_teams("hmt")[3]
    config = HMTConfig(horizon=200)
    for episode in range(3):
        state, _ = hmt_reset(team, RngStream(100 + episode), config)
        done = False
        while not done:
            actions = generator.integers(0, 5, size=4)
            state, result = hmt_step(state, actions, team, config)
            picked_up = np.array(result.info["events"].picked_up)
            np.testing.assert_allclose(
                picked_up - state.delivered, state.carried.sum(axis=0), atol=1e-9
            )
            assert (state.carried <= team.capabilities() + 1e-12).all()
            done = result.done
