"""Scaled-down learning checks. They take minutes to hours; run them with
CAPTEAM_RUN_SLOW=1."""

import warnings

import numpy as np
import pytest

from capteamcli.envs import (
    EnvConfig,
    HMTConfig,
    make_env,
    make_training_teams,
    team_from_capabilities,
    training_pool,
)
from capteamcli.evaluation import evaluate, sample_composition_teams
from capteamcli.tensorcore import RngStream
from capteamcli.training import TrainConfig, train

pytestmark = [pytest.mark.slow, pytest.mark.integration]


def test_hsn_pair_learns_to_spread_out():
    team = team_from_capabilities([[0.3], [0.5]], name="pair")
    result = train(
        lambda t: make_env("hsn", t),
        "hsn",
        "ca_cc_gnn",
        [team],
        TrainConfig(total_env_steps=500_000, seed=0),
    )
    returns = np.array(result.episode_returns)
    first, last = returns[:100].mean(), returns[-100:].mean()
    best = returns.max()
    assert last - first >= 0.4 * (best - first)


def test_hmt_specialists_fill_a_unit_quota():
    config = EnvConfig(hmt=HMTConfig(fixed_quota=(1, 1)))
    team = team_from_capabilities([[1.0, 0.0], [0.0, 1.0]], name="specialists")

    def factory(t):
        return make_env("hmt", t, config)

    result = train(factory, "hmt", "ca_mlp", [team], TrainConfig(total_env_steps=500_000))
    recent = result.episodes[-100:]
    filled = np.mean([bool(e.quota_filled) for e in recent])

    env = factory(team)
    generator = np.random.default_rng(0)
    baseline = []
    for episode in range(100):
        env.reset(team, RngStream(episode, ("baseline",)))
        done = False
        while not done:
            step = env.step(generator.integers(0, 5, size=2))
            done = step.done
        baseline.append(bool(step.info["quota_filled"]))
    assert filled >= 0.8
    assert filled > np.mean(baseline)


def test_capability_awareness_beats_ids_on_new_compositions_or_soft_fails():
    """Both seeds must favor capabilities; any seed that does not is a soft failure."""
    teams = make_training_teams("hsn")
    held_out = sample_composition_teams(training_pool("hsn"), 4, 20, RngStream(0, ("teams",)))
    losses = {}
    for seed in (0, 1):
        means = {}
        for variant in ("ca_cc_gnn", "id_mlp"):
            result = train(
                lambda t: make_env("hsn", t),
                "hsn",
                variant,
                teams,
                TrainConfig(total_env_steps=2_000_000, seed=seed),
            )
            report = evaluate(
                result.policy, result.policy_params, "hsn", held_out, 1, RngStream(seed)
            )
            means[variant] = report.summary()["avg_return"]["mean"]
        if means["ca_cc_gnn"] < means["id_mlp"]:
            losses[seed] = means
            warnings.warn(f"seed {seed}: id_mlp outscored ca_cc_gnn on new teams: {means}")
    if losses:
        pytest.xfail(f"soft failure in {len(losses)} of 2 seeds: {losses}")
