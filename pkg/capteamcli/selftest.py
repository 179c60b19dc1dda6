"""Oracle suites run by ``capteam-cli selftest``.

Each suite checks the build against an independent reference: finite
differences for gradients, hand-written formulas for rewards, Monte-Carlo
sampling for overlap areas and repeated runs for determinism. A suite returns
a short detail string on success and raises :class:`SuiteFailure` otherwise.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from capteamcli.envs import (
    EnvConfig,
    EnvKind,
    HMTEnv,
    HSNEnv,
    HSNState,
    hsn_pair_reward,
    hsn_step,
    lens_area,
    make_env,
    make_training_teams,
    pairwise_overlap,
    team_from_capabilities,
    training_pool,
)
from capteamcli.evaluation import sample_composition_teams
from capteamcli.nets import ID_DIM, Critic, GraphBatch, Policy, PolicyVariant
from capteamcli.tensorcore import (
    VERIFICATION_DTYPE,
    RngStream,
    Tape,
    finite_diff_check,
)
from capteamcli.tensorcore.checkpoint import Checkpoint, encode_checkpoint
from capteamcli.training import TrainConfig, n_step_returns, train

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-4
EQUIVARIANCE_TOLERANCE = 1e-6
REWARD_TOLERANCE = 1e-9
OVERLAP_RELATIVE_TOLERANCE = 0.01
SAFETY_SLACK = 1e-6
MONTE_CARLO_SAMPLES = 1_000_000


class SuiteFailure(AssertionError):
    """Raised by a suite whose oracle disagrees with the build."""


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float


Suite = Callable[[RngStream, bool], str]


def _random_graph_batch(
    generator: np.random.Generator, nodes: int, obs_dim: int, capability_dim: int
) -> GraphBatch:
    upper = np.triu(generator.integers(0, 2, size=(nodes, nodes)), k=1)
    ids = np.zeros((nodes, ID_DIM))
    ids[np.arange(nodes), generator.choice(ID_DIM, nodes, replace=False)] = 1.0
    return GraphBatch(
        node_features=generator.normal(size=(nodes, obs_dim)),
        adjacency=(upper + upper.T).astype(np.int8),
        capabilities=generator.uniform(0.0, 1.0, size=(nodes, capability_dim)),
        ids=ids,
    )


def gradient_suite(rng: RngStream, quick: bool) -> str:
    """Finite differences for every policy variant and the critic, float64, 3 nodes."""
    obs_dim, capability_dim = 4, 2
    probes = 3 if quick else 6
    worst: Dict[str, float] = {}
    for variant in PolicyVariant:
        stream = rng.split(variant.value)
        policy = Policy(variant, obs_dim, capability_dim)
        params = policy.init_params(stream.split("init"), VERIFICATION_DTYPE)
        batch = _random_graph_batch(stream.generator, 3, obs_dim, capability_dim)
        weights = stream.generator.normal(size=(3, 5))

        def policy_loss(tape: Tape, values, policy=policy, batch=batch, weights=weights):
            logits = policy.forward(tape, values, batch)
            return tape.sum(tape.mul(logits, tape.constant(weights)))

        worst[variant.value] = finite_diff_check(
            policy_loss, params, elements_per_param=probes, rng=stream.split("probe")
        )

    stream = rng.split("critic")
    critic = Critic(PolicyVariant.CA_CC_GNN, 3, obs_dim, capability_dim)
    params = critic.init_params(stream.split("init"), VERIFICATION_DTYPE)
    observations = stream.generator.normal(size=(2, 3, obs_dim))
    suffixes = stream.generator.uniform(size=(2, 3, capability_dim))
    targets = stream.generator.normal(size=(2, 1))

    def critic_loss(tape: Tape, values):
        error = tape.shift(critic.forward(tape, values, observations, suffixes), -targets)
        return tape.mean(tape.mul(error, error))

    worst["critic"] = finite_diff_check(
        critic_loss, params, elements_per_param=probes, rng=stream.split("probe")
    )
    failing = {k: v for k, v in worst.items() if not v < GRADCHECK_TOLERANCE}
    if failing:
        raise SuiteFailure(f"relative gradient error above {GRADCHECK_TOLERANCE}: {failing}")
    return f"max relative error {max(worst.values()):.2e} over {len(worst)} networks"


def equivariance_suite(rng: RngStream, quick: bool) -> str:
    """Relabeling robots permutes GNN outputs the same way."""
    trials = 20 if quick else 100
    obs_dim, capability_dim = 4, 2
    worst = 0.0
    for variant in (v for v in PolicyVariant if v.uses_graph):
        stream = rng.split(variant.value)
        policy = Policy(variant, obs_dim, capability_dim)
        params = policy.init_params(stream.split("init"), VERIFICATION_DTYPE)
        generator = stream.split("trials").generator
        for _ in range(trials):
            nodes = int(generator.integers(2, 7))
            batch = _random_graph_batch(generator, nodes, obs_dim, capability_dim)
            order = generator.permutation(nodes)
            base = policy.forward(Tape(VERIFICATION_DTYPE), params, batch).data
            moved = policy.forward(
                Tape(VERIFICATION_DTYPE), params, batch.permuted(order)
            ).data
            worst = max(worst, float(np.max(np.abs(moved - base[order]))))
    if not worst < EQUIVARIANCE_TOLERANCE:
        raise SuiteFailure(f"permutation deviation {worst:.3e} >= {EQUIVARIANCE_TOLERANCE}")
    return f"max deviation {worst:.2e}"


def _pair_reward_reference(positions: np.ndarray, radii: np.ndarray) -> float:
    total = 0.0
    for i in range(len(radii)):
        for j in range(i + 1, len(radii)):
            dx = positions[i, 0] - positions[j, 0]
            dy = positions[i, 1] - positions[j, 1]
            gap = math.hypot(dx, dy) - radii[i] - radii[j]
            total += (-0.9 * abs(gap) + 0.05) if gap < 0 else (-1.1 * abs(gap) - 0.05)
    return total


def hsn_reward_suite(rng: RngStream, quick: bool) -> str:
    cases = 100 if quick else 1000
    config = EnvConfig().hsn
    generator = rng.generator
    worst = 0.0
    for _ in range(cases):
        n = int(generator.integers(2, 6))
        radii = generator.uniform(0.2, 0.6, size=n)
        positions = config.arena.sample(generator, n)
        team = team_from_capabilities([[r] for r in radii])
        # All robots stop, so the reward is evaluated at the given positions.
        _, result = hsn_step(HSNState(positions), np.full(n, 4), team, config)
        worst = max(worst, abs(result.reward - _pair_reward_reference(positions, radii)))
    boundary = hsn_pair_reward((0.0, 0.0), (0.5, 0.0), 0.2, 0.3)
    if boundary != -0.05:
        raise SuiteFailure(f"touching disks should score -0.05, got {boundary!r}")
    if not worst <= REWARD_TOLERANCE:
        raise SuiteFailure(f"reward deviates from the reference by {worst:.3e}")
    return f"{cases} states, max deviation {worst:.2e}"


def hmt_decomposition_suite(rng: RngStream, quick: bool) -> str:
    episodes = 10 if quick else 100
    teams = make_training_teams(EnvKind.HMT)
    env = HMTEnv(teams[0])
    worst = 0.0
    for episode in range(episodes):
        team = teams[episode % len(teams)]
        stream = rng.split(f"episode-{episode}")
        env.reset(team, stream.split("reset"))
        generator = stream.split("actions").generator
        total = 0.0
        done = False
        info: dict = {}
        while not done:
            result = env.step(generator.integers(0, 5, size=team.size))
            total += result.reward
            done = result.done
            info = result.info
        rebuilt = info["events"].reconstructed_reward(env.config)
        worst = max(worst, abs(total - rebuilt))
    if not worst <= REWARD_TOLERANCE:
        raise SuiteFailure(f"event-log reconstruction off by {worst:.3e}")
    return f"{episodes} random episodes, max deviation {worst:.2e}"


def _monte_carlo_lens(
    generator: np.random.Generator,
    distance: float,
    r_i: float,
    r_j: float,
    samples: int,
) -> float:
    # Sample the bounding square of the smaller disk, centered at the origin.
    small, large = (r_i, r_j) if r_i <= r_j else (r_j, r_i)
    points = generator.uniform(-small, small, size=(samples, 2))
    inside_small = points[:, 0] ** 2 + points[:, 1] ** 2 <= small**2
    inside_large = (points[:, 0] - distance) ** 2 + points[:, 1] ** 2 <= large**2
    return float(np.mean(inside_small & inside_large)) * (2.0 * small) ** 2


def overlap_suite(rng: RngStream, quick: bool) -> str:
    cases = 10 if quick else 50
    samples = 200_000 if quick else MONTE_CARLO_SAMPLES
    generator = rng.generator
    worst = 0.0
    for _ in range(cases):
        r_i, r_j = generator.uniform(0.2, 0.6, size=2)
        distance = float(generator.uniform(0.0, 0.6) * (r_i + r_j))
        angle = generator.uniform(0.0, 2.0 * math.pi)
        origin = generator.uniform(-1.0, 1.0, size=2)
        other = origin + distance * np.array([math.cos(angle), math.sin(angle)])
        exact = pairwise_overlap(np.stack([origin, other]), [r_i, r_j])
        estimate = _monte_carlo_lens(generator, distance, r_i, r_j, samples)
        worst = max(worst, abs(exact - estimate) / exact)
    if pairwise_overlap([[0.0, 0.0], [2.0, 0.0]], [0.4, 0.5]) != 0.0:
        raise SuiteFailure("disjoint disks must not overlap")
    concentric = pairwise_overlap([[0.3, 0.3], [0.3, 0.3]], [0.4, 0.4])
    if abs(concentric - math.pi * 0.16) > 1e-12 or lens_area(0.0, 0.4, 0.4) != concentric:
        raise SuiteFailure(f"concentric equal disks should overlap pi r^2, got {concentric}")
    limit = OVERLAP_RELATIVE_TOLERANCE * (2 if quick else 1)
    if not worst < limit:
        raise SuiteFailure(f"Monte-Carlo relative error {worst:.3%} above {limit:.0%}")
    return f"{cases} configurations, max relative error {worst:.3%}"


def safety_suite(rng: RngStream, quick: bool) -> str:
    steps_wanted = 1000 if quick else 10_000
    config = EnvConfig().hsn
    generator = rng.split("teams").generator
    steps = 0
    episode = 0
    closest = math.inf
    while steps < steps_wanted:
        size = int(generator.integers(2, 9))
        team = team_from_capabilities(
            [[r] for r in generator.uniform(0.2, 0.6, size=size)], name=f"safety-{episode}"
        )
        env = HSNEnv(team, config)
        env.reset(team, rng.split(f"episode-{episode}"))
        actions = rng.split(f"actions-{episode}").generator
        done = False
        while not done and steps < steps_wanted:
            result = env.step(actions.integers(0, 5, size=size))
            closest = min(
                closest, result.info["min_distance"], result.info["min_path_distance"]
            )
            steps += 1
            done = result.done
        episode += 1
    floor = config.min_separation - SAFETY_SLACK
    if not closest >= floor:
        raise SuiteFailure(f"robots came within {closest:.6f} m (< {floor:.6f} m)")
    return f"{steps} steps, closest approach {closest:.4f} m"


def determinism_suite(rng: RngStream, quick: bool) -> str:
    teams = make_training_teams(EnvKind.HSN)
    config = TrainConfig(total_env_steps=64 if quick else 128, seed=rng.seed)

    def one_run():
        result = train(
            lambda team: make_env(EnvKind.HSN, team),
            EnvKind.HSN,
            PolicyVariant.CA_CC_GNN,
            teams,
            config,
            rng=RngStream(rng.seed, ("determinism",)),
        )
        log = result.log.to_frame().to_csv(index=False, float_format="%.17g")
        return log, encode_checkpoint(Checkpoint({}, result.policy_params))

    first, second = one_run(), one_run()
    if first[0] != second[0]:
        raise SuiteFailure("training logs differ between identical runs")
    if first[1] != second[1]:
        raise SuiteFailure("checkpoint bytes differ between identical runs")

    pool = training_pool(EnvKind.HSN)
    draws = [
        sample_composition_teams(pool, 4, 100, RngStream(rng.seed, ("teams",)))
        for _ in range(2)
    ]
    if draws[0] != draws[1]:
        raise SuiteFailure("evaluation teams differ for the same seed")
    return "training log, checkpoint and 100 sampled teams reproduced"


def n_step_suite(rng: RngStream, quick: bool) -> str:
    """Hand-built 8-step buffer with an episode end at index 3."""
    rewards = np.array([1.0, -2.0, 0.5, 3.0, 0.25, -1.0, 2.0, 4.0])
    dones = np.array([False, False, False, True, False, False, False, False])
    # state_values[k] = V(s_k); s_8 follows the buffer.
    state_values = rng.generator.normal(size=9)
    n_step = 5
    expected = np.zeros(8)
    for t in range(8):
        end = min(t + n_step, 8)
        stop = next((k for k in range(t, end) if dones[k]), None)
        if stop is not None:
            expected[t] = rewards[t : stop + 1].sum()
        else:
            expected[t] = rewards[t:end].sum() + state_values[end]
    got = n_step_returns(rewards, dones, state_values[1:], n_step)
    if not np.array_equal(got, expected):
        raise SuiteFailure(f"n-step returns {got.tolist()} != {expected.tolist()}")
    if got[3] != rewards[3]:
        raise SuiteFailure("the step that ends an episode must not bootstrap")
    return "8-step buffer matches brute-force 5-step sums exactly"


SUITES: Dict[str, Suite] = {
    "gradients": gradient_suite,
    "equivariance": equivariance_suite,
    "hsn-reward": hsn_reward_suite,
    "hmt-reward": hmt_decomposition_suite,
    "overlap": overlap_suite,
    "safety": safety_suite,
    "determinism": determinism_suite,
    "n-step": n_step_suite,
}


def run_suites(
    names: Optional[Sequence[str]] = None, seed: int = 0, quick: bool = False
) -> List[SuiteResult]:
    """Run the named suites (all by default); failures are collected, not raised."""
    selected = list(names) if names else list(SUITES)
    unknown = [name for name in selected if name not in SUITES]
    if unknown:
        raise ValueError(
            f"unknown suite(s) {', '.join(unknown)}; expected one of {', '.join(SUITES)}"
        )
    root = RngStream(seed, ("selftest",))
    results = []
    for name in selected:
        started = time.perf_counter()
        try:
            detail = SUITES[name](root.split(name), quick)
            passed = True
        except SuiteFailure as failure:
            detail, passed = str(failure), False
        except Exception as error:
            logger.debug("suite %s raised", name, exc_info=error)
            detail, passed = f"{type(error).__name__}: {error}", False
        results.append(
            SuiteResult(name, passed, detail, time.perf_counter() - started)
        )
        logger.info("suite %s: %s", name, "passed" if passed else "FAILED")
    return results
