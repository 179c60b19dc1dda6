from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Zone:
    """Axis-aligned rectangle; membership is boundary inclusive."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"zone bounds are empty or inverted: {self.as_list()}")

    @classmethod
    def from_list(cls, values) -> "Zone":
        values = list(values)
        if len(values) != 4:
            raise ValueError(
                f"a zone is [x_min, x_max, y_min, y_max], got {len(values)} values"
            )
        return cls(*(float(v) for v in values))

    def as_list(self) -> list:
        return [self.x_min, self.x_max, self.y_min, self.y_max]

    @property
    def center(self) -> np.ndarray:
        return np.array(
            [(self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0]
        )

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return (
            (points[..., 0] >= self.x_min)
            & (points[..., 0] <= self.x_max)
            & (points[..., 1] >= self.y_min)
            & (points[..., 1] <= self.y_max)
        )

    def clamp(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return np.stack(
            [
                np.clip(points[..., 0], self.x_min, self.x_max),
                np.clip(points[..., 1], self.y_min, self.y_max),
            ],
            axis=-1,
        )

    def sample(self, generator: np.random.Generator, count: int) -> np.ndarray:
        return np.stack(
            [
                generator.uniform(self.x_min, self.x_max, size=count),
                generator.uniform(self.y_min, self.y_max, size=count),
            ],
            axis=-1,
        )


@dataclass(frozen=True)
class HMTConfig:
    arena: Zone = Zone(-1.0, 1.0, -1.0, 1.0)
    lumber_depot: Zone = Zone(-1.0, -0.6, 0.2, 1.0)
    concrete_depot: Zone = Zone(-1.0, -0.6, -1.0, -0.2)
    construction_site: Zone = Zone(0.6, 1.0, -0.4, 0.4)
    horizon: int = 500
    step_size: float = 0.05
    quota_min_factor: float = 0.5
    quota_max_factor: float = 2.0
    fixed_quota: Optional[Tuple[int, int]] = None
    pickup_reward: float = 0.25
    dropoff_reward: float = 0.75
    surplus_penalty: float = 0.10
    time_penalty: float = 0.005


@dataclass(frozen=True)
class HSNConfig:
    arena: Zone = Zone(-1.6, 1.6, -1.0, 1.0)
    horizon: int = 60
    step_size: float = 0.19
    min_separation: float = 0.17
    spawn_separation: float = 0.30
    spawn_attempts: int = 10_000
    filter_iterations: int = 20
    filter_sweeps: int = 10


@dataclass(frozen=True)
class EnvConfig:
    hmt: HMTConfig = field(default_factory=HMTConfig)
    hsn: HSNConfig = field(default_factory=HSNConfig)
