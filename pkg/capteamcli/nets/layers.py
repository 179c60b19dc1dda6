from __future__ import annotations

from typing import Dict, List, Mapping, Sequence

import numpy as np

from capteamcli.tensorcore import RngStream, Tape, Tensor
from capteamcli.tensorcore.tensor import TRAINING_DTYPE

HIDDEN_UNITS = 64


def init_linear(
    prefix: str, fan_in: int, fan_out: int, rng: RngStream, dtype=TRAINING_DTYPE
) -> Dict[str, Tensor]:
    # uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases
    bound = np.sqrt(1.0 / fan_in)
    weight = rng.generator.uniform(-bound, bound, size=(fan_in, fan_out))
    return {
        f"{prefix}/weight": Tensor(
            weight, dtype=dtype, name=f"{prefix}/weight", requires_grad=True
        ),
        f"{prefix}/bias": Tensor(
            np.zeros(fan_out), dtype=dtype, name=f"{prefix}/bias", requires_grad=True
        ),
    }


class MLP:
    """Stack of affine layers with ReLU between them.

    ``sizes`` lists layer widths including input and output, so ``[F, 64, 5]``
    is two weight layers. Parameters are named ``<prefix>/<layer>/<weight|bias>``.
    """

    def __init__(self, prefix: str, sizes: Sequence[int]) -> None:
        if len(sizes) < 2:
            raise ValueError(f"{prefix}: an MLP needs at least two sizes, got {sizes}")
        self.prefix = prefix
        self.sizes: List[int] = list(sizes)

    @property
    def in_features(self) -> int:
        return self.sizes[0]

    @property
    def out_features(self) -> int:
        return self.sizes[-1]

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    def param_names(self) -> List[str]:
        names = []
        for layer in range(self.depth):
            names += [f"{self.prefix}/{layer}/weight", f"{self.prefix}/{layer}/bias"]
        return names

    def init(self, rng: RngStream, dtype=TRAINING_DTYPE) -> Dict[str, Tensor]:
        params: Dict[str, Tensor] = {}
        stream = rng.split(self.prefix)
        for layer, (fan_in, fan_out) in enumerate(zip(self.sizes, self.sizes[1:])):
            params.update(
                init_linear(
                    f"{self.prefix}/{layer}",
                    fan_in,
                    fan_out,
                    stream.split(str(layer)),
                    dtype,
                )
            )
        return params

    def forward(
        self,
        tape: Tape,
        params: Mapping[str, Tensor],
        x: Tensor,
        activate_output: bool = False,
    ) -> Tensor:
        h = x
        for layer in range(self.depth):
            weight = params[f"{self.prefix}/{layer}/weight"]
            bias = params[f"{self.prefix}/{layer}/bias"]
            h = tape.add(tape.matmul(h, weight), bias)
            if layer < self.depth - 1 or activate_output:
                h = tape.relu(h)
        return h
