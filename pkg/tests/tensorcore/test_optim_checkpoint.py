import numpy as np
import pytest

from capteamcli.tensorcore import (
    DEFAULT_LR,
    AdamState,
    Checkpoint,
    CheckpointError,
    GradientError,
    RngStream,
    Tensor,
    adam_step,
    load_checkpoint,
    save_checkpoint,
)
from capteamcli.tensorcore.checkpoint import decode_checkpoint, encode_checkpoint

pytestmark = pytest.mark.unit


def _params():
    return {
        "layer/weight": Tensor(
            np.array([[0.1, -0.2], [0.3, 0.4]], dtype=np.float32),
            name="layer/weight",
            requires_grad=True,
        ),
        "layer/bias": Tensor(
            np.array([0.0, 1.5], dtype=np.float32), name="layer/bias", requires_grad=True
        ),
    }


def test_default_learning_rate():
    assert DEFAULT_LR == 0.0005


def test_first_adam_step_moves_each_weight_by_lr_against_the_gradient():
    params = _params()
    grads = {name: np.full(p.shape, 2.0, dtype=np.float32) for name, p in params.items()}
    updated, state = adam_step(params, grads, AdamState.for_params(params), lr=0.01)
    assert state.step_count == 1
    for name, param in params.items():
        np.testing.assert_allclose(updated[name].data, param.data - 0.01, atol=1e-6)
    # inputs untouched
    np.testing.assert_array_equal(params["layer/bias"].data, [0.0, 1.5])


def test_missing_gradient_leaves_parameter_in_place():
    params = _params()
    updated, _ = adam_step(params, {}, AdamState.for_params(params))
    np.testing.assert_array_equal(updated["layer/weight"].data, params["layer/weight"].data)


def test_non_finite_gradient_is_refused():
    params = _params()
    grads = {"layer/bias": np.array([np.nan, 0.0], dtype=np.float32)}
    with pytest.raises(GradientError, match="layer/bias"):
        adam_step(params, grads, AdamState.for_params(params))


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    params = _params()
    checkpoint = Checkpoint({"variant": "ca_cc_gnn", "env_kind": "hsn"}, params)
    path = save_checkpoint(tmp_path / "policy.ckpt", checkpoint)
    loaded = load_checkpoint(path)
    assert loaded.metadata == {"variant": "ca_cc_gnn", "env_kind": "hsn"}
    assert list(loaded.params) == list(params)
    for name, tensor in params.items():
        assert loaded.params[name].data.tobytes() == tensor.data.tobytes()
    assert encode_checkpoint(loaded) == path.read_text(encoding="utf-8")


def test_validate_against_names_missing_and_extra_parameters():
    checkpoint = Checkpoint({}, {"a": Tensor(np.zeros(2))})
    with pytest.raises(CheckpointError, match="missing=\\['b'\\]"):
        checkpoint.validate_against({"a": Tensor(np.zeros(2)), "b": Tensor(np.zeros(1))})
    with pytest.raises(CheckpointError, match="shape"):
        checkpoint.validate_against({"a": Tensor(np.zeros(3))})


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "unsupported checkpoint header"),
        ("capteam-checkpoint\t2\n", "unsupported checkpoint header"),
        ("capteam-checkpoint\t1\nparam\tw\t2\t0x1.0p+0\n", "declares shape"),
        ("capteam-checkpoint\t1\nweights\tw\n", "unrecognized record"),
    ],
)
def test_malformed_checkpoints_fail_loudly(text, message):
    with pytest.raises(CheckpointError, match=message):
        decode_checkpoint(text)


def test_missing_checkpoint_file(tmp_path):
    with pytest.raises(CheckpointError, match="cannot read"):
        load_checkpoint(tmp_path / "nope.ckpt")


def test_named_streams_are_independent_of_consumption_order():
    root = RngStream(42)
    a_first = root.split("a").generator.random(3)
    root.split("b").generator.random(100)
    np.testing.assert_array_equal(a_first, RngStream(42).split("a").generator.random(3))
    assert not np.array_equal(a_first, root.split("b").generator.random(3))
    assert root.split("x").split("y").name == "x/y"


def test_negative_seed_is_rejected():
    with pytest.raises(ValueError):
        RngStream(-1)
