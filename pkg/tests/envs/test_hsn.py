import math

import numpy as np
import pytest

from capteamcli.envs import (
    HSNConfig,
    HSNState,
    InvalidActionError,
    PlacementError,
    Zone,
    closest_approach,
    connectivity_check,
    full_observation,
    hsn_observations,
    hsn_observe,
    hsn_pair_reward,
    hsn_reset,
    hsn_step,
    hsn_team_reward,
    lens_area,
    make_env,
    make_training_teams,
    min_pairwise_distance,
    pairwise_overlap,
    safety_filter,
    team_from_capabilities,
)
from capteamcli.nets import ID_DIM
from capteamcli.tensorcore import RngStream

pytestmark = pytest.mark.unit

STOP = 4


@pytest.mark.parametrize(
    "distance, expected",
    [(0.5, -0.05), (0.3, -0.13), (1.0, -0.6)],
)
def test_pair_reward_is_piecewise_in_the_gap(distance, expected):
    assert hsn_pair_reward((0.0, 0.0), (distance, 0.0), 0.2, 0.3) == pytest.approx(
        expected, abs=1e-12
    )


def test_team_reward_sums_pairs():
    positions = np.array([[0.0, 0.0], [0.4, 0.1], [-0.5, 0.7]])
    radii = np.array([0.2, 0.3, 0.25])
    expected = sum(
        hsn_pair_reward(positions[i], positions[j], radii[i], radii[j])
        for i, j in ((0, 1), (0, 2), (1, 2))
    )
    assert hsn_team_reward(positions, radii) == pytest.approx(expected, abs=1e-12)
    assert hsn_team_reward(positions[:1], radii[:1]) == 0.0


def test_team_reward_ignores_robot_order(generator):
    for _ in range(20):
        size = int(generator.integers(2, 9))
        positions = generator.uniform(-1.0, 1.0, size=(size, 2))
        radii = generator.uniform(0.2, 0.6, size=size)
        order = generator.permutation(size)
        assert hsn_team_reward(positions[order], radii[order]) == pytest.approx(
            hsn_team_reward(positions, radii), abs=1e-12
        )


def test_reset_spreads_robots_inside_the_arena():
    config = HSNConfig()
    team = make_training_teams("hsn")[4]
    for seed in range(10):
        state, obs = hsn_reset(team, RngStream(seed), config)
        assert obs.shape == (4, 2)
        assert config.arena.contains(state.positions).all()
        assert min_pairwise_distance(state.positions) >= config.spawn_separation


def test_reset_gives_up_on_a_crowded_arena():
    config = HSNConfig(arena=Zone(0.0, 0.1, 0.0, 0.1), spawn_attempts=50)
    team = team_from_capabilities([[0.2]] * 4)
    with pytest.raises(PlacementError, match="within 50 attempts"):
        hsn_reset(team, RngStream(0), config)


def test_step_reports_geometry_and_ends_at_horizon():
    team = team_from_capabilities([[0.2], [0.3]])
    config = HSNConfig(horizon=2)
    state = HSNState(np.array([[0.0, 0.0], [0.5, 0.0]]))
    state, result = hsn_step(state, [STOP, STOP], team, config)
    assert result.reward == pytest.approx(-0.05)
    assert result.info["connected"] is True
    assert result.info["overlap"] == 0.0
    assert result.info["min_distance"] == pytest.approx(0.5)
    assert not result.done
    _, result = hsn_step(state, [STOP, STOP], team, config)
    assert result.done and result.info["step"] == 2


def test_moves_are_clamped_to_the_arena():
    team = team_from_capabilities([[0.2]])
    state = HSNState(np.array([[1.55, 0.0]]))
    state, _ = hsn_step(state, [1], team)
    np.testing.assert_allclose(state.positions, [[1.6, 0.0]])


def test_step_rejects_bad_actions():
    team = team_from_capabilities([[0.2], [0.3]])
    state = HSNState(np.array([[0.0, 0.0], [0.5, 0.0]]))
    with pytest.raises(InvalidActionError, match="invalid action"):
        hsn_step(state, [STOP, 5], team)
    with pytest.raises(InvalidActionError, match="expected 2 actions"):
        hsn_step(state, [STOP], team)


def test_lens_area_closed_forms():
    assert lens_area(1.0, 0.2, 0.3) == 0.0
    assert lens_area(0.0, 0.2, 0.3) == pytest.approx(math.pi * 0.04)
    assert lens_area(1.0, 1.0, 1.0) == pytest.approx(
        2 * math.pi / 3 - math.sqrt(3) / 2, abs=1e-12
    )
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
    assert pairwise_overlap(positions, [1.0, 1.0, 0.1]) == pytest.approx(
        2 * math.pi / 3 - math.sqrt(3) / 2, abs=1e-12
    )


def test_connectivity_counts_touching_disks():
    line = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
    assert connectivity_check(line, [0.25, 0.25, 0.25])
    assert not connectivity_check(line, [0.2, 0.2, 0.2])


def test_safety_filter_keeps_minimum_separation():
    positions = np.array([[0.0, 0.0], [0.3, 0.0]])
    proposal = np.array([[0.19, 0.0], [-0.19, 0.0]])
    scaled = safety_filter(positions, proposal)
    assert min_pairwise_distance(positions + scaled) >= 0.17 - 1e-9
    assert 0.0 < scaled[0, 0] < 0.19


def test_head_on_robots_stop_short_of_each_other():
    positions = np.array([[0.0, 0.0], [0.2, 0.0]])
    proposal = np.array([[0.19, 0.0], [-0.19, 0.0]])
    # Unfiltered, the two would swap sides and end 0.18 apart.
    assert closest_approach(positions, proposal) == pytest.approx(0.0, abs=1e-12)

    scaled = safety_filter(positions, proposal)
    after = positions + scaled
    assert after[0, 0] < after[1, 0]
    assert closest_approach(positions, scaled) >= 0.17 - 1e-9
    assert scaled[0, 0] == pytest.approx(0.015, abs=1e-6)
    assert scaled[1, 0] == pytest.approx(-0.015, abs=1e-6)


def test_safety_filter_blocks_passing_through():
    positions = np.array([[0.0, 0.0], [0.5, 0.0]])
    proposal = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert min_pairwise_distance(positions + proposal) == pytest.approx(0.5)

    scaled = safety_filter(positions, proposal)
    assert scaled[0, 0] == pytest.approx(0.33, abs=1e-5)
    assert closest_approach(positions, scaled) >= 0.17 - 1e-9


def test_pairs_inside_the_separation_may_only_move_apart():
    positions = np.array([[0.0, 0.0], [0.1, 0.0]])
    apart = np.array([[-0.05, 0.0], [0.05, 0.0]])
    np.testing.assert_array_equal(safety_filter(positions, apart), apart)
    closer = np.array([[0.01, 0.0], [0.0, 0.0]])
    np.testing.assert_array_equal(safety_filter(positions, closer), np.zeros((2, 2)))


def test_safety_filter_leaves_safe_moves_alone():
    positions = np.array([[0.0, 0.0], [1.0, 0.0]])
    proposal = np.array([[0.0, 0.19], [0.19, 0.0]])
    np.testing.assert_array_equal(safety_filter(positions, proposal), proposal)


def test_random_rollout_never_violates_separation(generator):
    team = make_training_teams("hsn")[0]
    env = make_env("hsn", team)
    env.reset(team, RngStream(7))
    for _ in range(200):
        result = env.step(generator.integers(0, 5, size=team.size))
        assert result.info["min_distance"] >= 0.17 - 1e-6
        assert result.info["min_path_distance"] >= 0.17 - 1e-6
        if result.done:
            env.reset(team, RngStream(int(generator.integers(1 << 30))))


def test_policy_input_is_position_then_suffix():
    team = make_training_teams("hsn")[0]
    state, _ = hsn_reset(team, RngStream(3))
    base = hsn_observations(state)
    for i in range(team.size):
        np.testing.assert_array_equal(hsn_observe(state, i), state.positions[i])
        aware = full_observation(base, team, "ca_gnn", i)
        np.testing.assert_array_equal(aware[:2], hsn_observe(state, i))
        np.testing.assert_array_equal(aware[2:], team.capabilities()[i])
        with_ids = full_observation(base, team, "id_mlp", i)
        assert with_ids.shape == (2 + ID_DIM,)
        np.testing.assert_array_equal(with_ids[2:], team.one_hot_ids(ID_DIM)[i])
        assert with_ids[2:].sum() == 1.0
