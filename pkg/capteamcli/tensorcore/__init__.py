"""Dense reverse-mode differentiation, Adam and checkpoints for the policy networks."""

from capteamcli.tensorcore.checkpoint import (
    Checkpoint,
    CheckpointError,
    load_checkpoint,
    save_checkpoint,
)
from capteamcli.tensorcore.gradcheck import finite_diff_check
from capteamcli.tensorcore.optim import DEFAULT_LR, AdamState, adam_step
from capteamcli.tensorcore.rng import RngStream
from capteamcli.tensorcore.tensor import (
    PRIMITIVES,
    TRAINING_DTYPE,
    VERIFICATION_DTYPE,
    GradientError,
    ShapeError,
    Tape,
    Tensor,
    apply_primitive,
)

__all__ = [
    "AdamState",
    "Checkpoint",
    "CheckpointError",
    "DEFAULT_LR",
    "GradientError",
    "PRIMITIVES",
    "RngStream",
    "ShapeError",
    "TRAINING_DTYPE",
    "Tape",
    "Tensor",
    "VERIFICATION_DTYPE",
    "adam_step",
    "apply_primitive",
    "finite_diff_check",
    "load_checkpoint",
    "save_checkpoint",
]
