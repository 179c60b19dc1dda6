import numpy as np
import pytest

from capteamcli.envs import (
    HMT_TRAINING_TABLE,
    HSN_TRAINING_TABLE,
    EnvKind,
    RobotSpec,
    TeamError,
    TeamSpec,
    make_training_teams,
    observation_suffix,
    team_from_capabilities,
    training_pool,
    validate_team,
)
from capteamcli.nets import ID_DIM

pytestmark = pytest.mark.unit


def test_five_training_teams_of_four():
    for kind in ("hmt", "hsn"):
        teams = make_training_teams(kind)
        assert [t.size for t in teams] == [4] * 5
        assert [r.id_index for r in training_pool(kind)] == list(range(20))


def test_hmt_capabilities_are_lumber_then_concrete():
    team = make_training_teams("hmt")[3]
    assert team.name == "hmt-train-4"
    np.testing.assert_allclose(
        team.capabilities(), [[0.0, 1.0], [1.0, 0.0], [0.9, 0.1], [0.7, 0.3]]
    )
    assert [r.id_index for r in team.robots] == [12, 13, 14, 15]
    assert HMT_TRAINING_TABLE[3][0] == (1.0, 0.0)


def test_hsn_radii_match_the_table():
    team = make_training_teams(EnvKind.HSN)[4]
    np.testing.assert_allclose(team.capabilities()[:, 0], HSN_TRAINING_TABLE[4])
    assert team.capabilities()[3, 0] == pytest.approx(0.58343)


def test_capability_dims():
    assert EnvKind.HMT.capability_dim == 2
    assert EnvKind.HSN.capability_dim == 1
    with pytest.raises(TeamError, match="unknown environment"):
        EnvKind.parse("maze")


@pytest.mark.parametrize(
    "kind, caps, message",
    [
        ("hsn", [[0.2], [1.5]], "sensing radii"),
        ("hsn", [[0.2], [0.0]], "sensing radii"),
        ("hmt", [[0.5, 1.2]], "carrying capacities"),
        ("hmt", [[0.5]], "capability value"),
    ],
)
def test_validate_team_rejects_out_of_range(kind, caps, message):
    with pytest.raises(TeamError, match=message):
        validate_team(kind, team_from_capabilities(caps))


def test_team_size_limits():
    with pytest.raises(TeamError, match="expected 1..32"):
        TeamSpec(())
    with pytest.raises(TeamError, match="mixes capability dimensions"):
        TeamSpec((RobotSpec((0.1,)), RobotSpec((0.1, 0.2))))
    with pytest.raises(TeamError):
        RobotSpec((-0.1,))


def test_suffix_follows_variant():
    team = make_training_teams("hsn")[1]
    ids = observation_suffix(team, "id_gnn")
    assert ids.shape == (4, ID_DIM)
    np.testing.assert_array_equal(ids.argmax(axis=1), [4, 5, 6, 7])
    np.testing.assert_allclose(observation_suffix(team, "ca_mlp"), team.capabilities())


def test_new_robots_have_no_ids():
    team = team_from_capabilities([[0.3], [0.4]])
    assert not team.has_ids
    with pytest.raises(TeamError, match="no training-pool id"):
        team.one_hot_ids(ID_DIM)
