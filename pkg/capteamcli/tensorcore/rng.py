from __future__ import annotations

import zlib
from typing import Tuple

import numpy as np


class RngStream:
    """A named, splittable random stream.

    Streams are addressed by a path of names below a root seed. Each path maps
    to its own Philox counter-based generator, so ``root.split("eval")`` yields
    the same draws no matter what other streams were consumed before it.
    """

    def __init__(self, seed: int, path: Tuple[str, ...] = ()) -> None:
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.path = tuple(path)
        spawn_key = tuple(zlib.crc32(name.encode("utf-8")) for name in self.path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    @property
    def name(self) -> str:
        return "/".join(self.path) or "root"

    def split(self, name: str) -> "RngStream":
        return RngStream(self.seed, self.path + (name,))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, name={self.name!r})"
