import numpy as np
import pytest

from capteamcli.nets import (
    HIDDEN_UNITS,
    ID_DIM,
    NUM_ACTIONS,
    ActionDistribution,
    Critic,
    GraphBatch,
    GraphError,
    Policy,
    PolicyVariant,
    SelectionMode,
    VariantInputError,
    action_select,
    encoder_forward,
    gcn_layer,
    policy_forward,
    team_batch,
)
from capteamcli.tensorcore import (
    VERIFICATION_DTYPE,
    RngStream,
    Tape,
    Tensor,
    finite_diff_check,
)

pytestmark = pytest.mark.unit

OBS_DIM, CAP_DIM = 4, 2


def _batch(generator, nodes=3, adjacency=None):
    ids = np.zeros((nodes, ID_DIM))
    ids[np.arange(nodes), np.arange(nodes)] = 1.0
    if adjacency is None:
        adjacency = np.ones((nodes, nodes), dtype=np.int8)
    return GraphBatch(
        node_features=generator.normal(size=(nodes, OBS_DIM)),
        adjacency=np.asarray(adjacency, dtype=np.int8),
        capabilities=generator.uniform(size=(nodes, CAP_DIM)),
        ids=ids,
    )


def _params(policy, seed=0):
    return policy.init_params(RngStream(seed), VERIFICATION_DTYPE)


@pytest.mark.parametrize("variant", list(PolicyVariant))
def test_every_variant_emits_five_logits_per_robot(variant, generator):
    policy = Policy(variant, OBS_DIM, CAP_DIM)
    trace = {}
    logits = policy.forward(Tape(VERIFICATION_DTYPE), _params(policy), _batch(generator), trace)
    assert logits.shape == (3, NUM_ACTIONS)
    assert trace["logits"] == (3, NUM_ACTIONS)


def test_gnn_shapes_follow_the_documented_layout(generator):
    suffix_width = {"id_gnn": ID_DIM, "ca_gnn": 0, "ca_cc_gnn": CAP_DIM}
    for variant in (PolicyVariant.ID_GNN, PolicyVariant.CA_GNN, PolicyVariant.CA_CC_GNN):
        policy = Policy(variant, OBS_DIM, CAP_DIM)
        trace = {}
        policy.forward(Tape(VERIFICATION_DTYPE), _params(policy), _batch(generator), trace)
        assert trace["input"] == (3, OBS_DIM + suffix_width[variant.value])
        assert trace["encoder"] == (3, HIDDEN_UNITS)
        assert trace["gcn"] == (3, HIDDEN_UNITS)
        extra = CAP_DIM if variant is PolicyVariant.CA_GNN else 0
        assert trace["pre_action"] == (3, 2 * HIDDEN_UNITS + extra)


def test_mlp_variants_have_four_weight_layers():
    policy = Policy(PolicyVariant.CA_MLP, OBS_DIM, CAP_DIM)
    assert policy.mlp.sizes == [OBS_DIM + CAP_DIM, 64, 64, 64, NUM_ACTIONS]


@pytest.mark.parametrize("variant", list(PolicyVariant))
def test_policy_gradients_match_finite_differences(variant, generator):
    policy = Policy(variant, OBS_DIM, CAP_DIM)
    batch = _batch(generator)
    weights = generator.normal(size=(3, NUM_ACTIONS))

    def loss(tape, values):
        return tape.sum(tape.mul(policy.forward(tape, values, batch), tape.constant(weights)))

    error = finite_diff_check(
        loss, _params(policy), elements_per_param=4, rng=RngStream(5, ("probe",))
    )
    assert error < 1e-4


def test_critic_gradients_match_finite_differences(generator):
    critic = Critic(PolicyVariant.CA_MLP, 3, OBS_DIM, CAP_DIM)
    params = critic.init_params(RngStream(1), VERIFICATION_DTYPE)
    observations = generator.normal(size=(2, 3, OBS_DIM))
    suffixes = generator.uniform(size=(2, 3, CAP_DIM))

    def loss(tape, values):
        v = critic.forward(tape, values, observations, suffixes)
        return tape.mean(tape.mul(v, v))

    assert finite_diff_check(loss, params, elements_per_param=4, rng=RngStream(2)) < 1e-4


@pytest.mark.parametrize(
    "variant", [PolicyVariant.ID_GNN, PolicyVariant.CA_GNN, PolicyVariant.CA_CC_GNN]
)
def test_gnn_outputs_are_permutation_equivariant(variant, generator):
    policy = Policy(variant, OBS_DIM, CAP_DIM)
    params = _params(policy)
    for _ in range(25):
        nodes = int(generator.integers(2, 7))
        upper = np.triu(generator.integers(0, 2, size=(nodes, nodes)), k=1)
        batch = _batch(generator, nodes, upper + upper.T)
        order = generator.permutation(nodes)
        base = policy.forward(Tape(VERIFICATION_DTYPE), params, batch).data
        moved = policy.forward(Tape(VERIFICATION_DTYPE), params, batch.permuted(order)).data
        np.testing.assert_allclose(moved, base[order], atol=1e-6, rtol=0)


def test_gcn_single_node_sums_only_its_own_message():
    tape = Tape(VERIFICATION_DTYPE)
    h = Tensor(np.array([[1.0, -2.0]]))
    out = gcn_layer(tape, h, np.zeros((1, 1)), lambda x: tape.scale(x, 3.0))
    np.testing.assert_allclose(out.data, [[3.0, 0.0]])


def test_gcn_rejects_asymmetric_adjacency():
    tape = Tape(VERIFICATION_DTYPE)
    with pytest.raises(GraphError):
        gcn_layer(tape, Tensor(np.ones((2, 2))), np.array([[0, 1], [0, 0]]), tape.relu)


def test_gnn_policy_handles_any_team_size(generator):
    policy = Policy(PolicyVariant.CA_CC_GNN, OBS_DIM, CAP_DIM)
    params = _params(policy)
    for nodes in (1, 3, 8, 15):
        dist = policy_forward(policy, params, _batch(generator, nodes))
        assert dist.logits.shape == (nodes, NUM_ACTIONS)


def test_missing_suffix_is_reported(generator):
    batch = _batch(generator)
    ca = Policy(PolicyVariant.CA_MLP, OBS_DIM, CAP_DIM)
    with pytest.raises(VariantInputError, match="capability"):
        ca.forward(Tape(), _params(ca), GraphBatch(batch.node_features, batch.adjacency))
    id_policy = Policy(PolicyVariant.ID_MLP, OBS_DIM, CAP_DIM)
    no_ids = GraphBatch(batch.node_features, batch.adjacency, batch.capabilities)
    with pytest.raises(VariantInputError, match="one-hot"):
        id_policy.forward(Tape(), _params(id_policy), no_ids)


def test_encoder_names_expected_layout():
    policy = Policy(PolicyVariant.CA_CC_GNN, OBS_DIM, CAP_DIM)
    with pytest.raises(VariantInputError, match="suffix"):
        encoder_forward(policy, Tape(), _params(policy), Tensor(np.zeros((2, OBS_DIM))))


def test_unknown_variant_name():
    with pytest.raises(VariantInputError, match="ca_cc_gnn"):
        PolicyVariant.parse("cc_gnn")


def test_team_batch_files_suffix_by_variant():
    obs = np.zeros((2, OBS_DIM))
    suffix = np.ones((2, CAP_DIM))
    assert team_batch("ca_gnn", obs, suffix).capabilities is suffix
    assert team_batch("id_mlp", obs, suffix).ids is suffix


def test_stacked_graphs_stay_disjoint(generator):
    stacked = GraphBatch.stack([_batch(generator, 2), _batch(generator, 3)])
    assert stacked.num_nodes == 5
    assert stacked.adjacency[:2, 2:].sum() == 0


def test_hard_selection_breaks_ties_to_lowest_index():
    dist = ActionDistribution(np.array([[0.0, 2.0, 2.0, 1.0, 0.0], [5.0, 5.0, 5.0, 5.0, 5.0]]))
    np.testing.assert_array_equal(action_select(dist, SelectionMode.HARD).actions, [1, 0])


def test_soft_selection_follows_the_distribution():
    logits = np.log(np.array([[0.1, 0.2, 0.3, 0.4, 1e-12]]))
    dist = ActionDistribution(np.repeat(logits, 20000, axis=0))
    selection = action_select(dist, "soft", RngStream(3))
    counts = np.bincount(selection.actions, minlength=NUM_ACTIONS) / 20000
    np.testing.assert_allclose(counts[:4], [0.1, 0.2, 0.3, 0.4], atol=0.015)
    expected = dist.log_probabilities[np.arange(20000), selection.actions]
    np.testing.assert_allclose(selection.log_probs, expected, atol=1e-6)


def test_soft_selection_needs_rng_and_finite_logits():
    with pytest.raises(ValueError, match="rng"):
        action_select(ActionDistribution(np.zeros((1, 5))), "soft")
    with pytest.raises(ValueError, match="NaN"):
        action_select(ActionDistribution(np.full((1, 5), np.nan)), "hard")
