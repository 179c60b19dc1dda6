"""Text checkpoint codec.

Layout, one record per line, fields separated by single tabs::

    capteam-checkpoint<TAB>1
    meta<TAB><key><TAB><value>            (zero or more)
    param<TAB><name><TAB><d0,d1,...><TAB><hex values separated by spaces>

Values are float32 rendered with ``float.hex`` so a load reproduces the saved
bits exactly. Parameter order is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from capteamcli.tensorcore.tensor import Tensor
from capteamcli.utils.io import write_text_atomic

CHECKPOINT_MAGIC = "capteam-checkpoint"
CHECKPOINT_VERSION = "1"


class CheckpointError(ValueError):
    """Raised when a checkpoint is malformed or does not match the expected layout."""


@dataclass
class Checkpoint:
    metadata: Dict[str, str] = field(default_factory=dict)
    params: Dict[str, Tensor] = field(default_factory=dict)

    def validate_against(self, expected: Mapping[str, Tensor]) -> None:
        """Require exactly the same parameter names and shapes, in any order."""
        missing = [name for name in expected if name not in self.params]
        extra = [name for name in self.params if name not in expected]
        if missing or extra:
            raise CheckpointError(
                f"checkpoint parameters differ: missing={missing} unexpected={extra}"
            )
        for name, tensor in expected.items():
            if self.params[name].shape != tensor.shape:
                raise CheckpointError(
                    f"parameter {name!r} has shape {self.params[name].shape}, "
                    f"expected {tensor.shape}"
                )


def encode_checkpoint(checkpoint: Checkpoint) -> str:
    lines = [f"{CHECKPOINT_MAGIC}\t{CHECKPOINT_VERSION}"]
    for key, value in checkpoint.metadata.items():
        if "\t" in key or "\t" in str(value) or "\n" in str(value):
            raise CheckpointError(f"metadata {key!r} contains a tab or newline")
        lines.append(f"meta\t{key}\t{value}")
    for name, tensor in checkpoint.params.items():
        values = np.asarray(tensor.data, dtype=np.float32).reshape(-1)
        shape = ",".join(str(d) for d in tensor.shape)
        encoded = " ".join(float(v).hex() for v in values)
        lines.append(f"param\t{name}\t{shape}\t{encoded}")
    return "\n".join(lines) + "\n"


def decode_checkpoint(text: str) -> Checkpoint:
    lines = text.splitlines()
    if not lines or lines[0] != f"{CHECKPOINT_MAGIC}\t{CHECKPOINT_VERSION}":
        header = lines[0] if lines else "<empty>"
        raise CheckpointError(
            f"unsupported checkpoint header {header!r}; expected "
            f"{CHECKPOINT_MAGIC} version {CHECKPOINT_VERSION}"
        )
    checkpoint = Checkpoint()
    for number, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if fields[0] == "meta" and len(fields) == 3:
            checkpoint.metadata[fields[1]] = fields[2]
        elif fields[0] == "param" and len(fields) == 4:
            name, shape_text, encoded = fields[1], fields[2], fields[3]
            try:
                shape: Tuple[int, ...] = tuple(
                    int(d) for d in shape_text.split(",") if d
                )
                values = [float.fromhex(v) for v in encoded.split()]
            except ValueError as error:
                raise CheckpointError(f"line {number}: {error}") from error
            if int(np.prod(shape, dtype=np.int64)) != len(values):
                raise CheckpointError(
                    f"line {number}: {name!r} declares shape {shape} "
                    f"but holds {len(values)} values"
                )
            if name in checkpoint.params:
                raise CheckpointError(f"line {number}: duplicate parameter {name!r}")
            data = np.asarray(values, dtype=np.float32).reshape(shape)
            checkpoint.params[name] = Tensor(data, name=name, requires_grad=True)
        else:
            raise CheckpointError(f"line {number}: unrecognized record {fields[0]!r}")
    return checkpoint


def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    return write_text_atomic(Path(path), encode_checkpoint(checkpoint))


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise CheckpointError(f"cannot read checkpoint {path}: {error}") from error
    return decode_checkpoint(text)
