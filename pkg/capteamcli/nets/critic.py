from __future__ import annotations

from typing import Dict, Mapping

import numpy as np

from capteamcli.nets.layers import HIDDEN_UNITS, MLP
from capteamcli.nets.policies import PolicyVariant, VariantInputError
from capteamcli.tensorcore import RngStream, Tape, Tensor
from capteamcli.tensorcore.tensor import TRAINING_DTYPE


class Critic:
    """Centralized value network over the whole training team.

    Input is every robot's observation followed by its suffix (capabilities
    for CA variants, one-hot ids for ID variants), concatenated in canonical
    team order.
    """

    def __init__(
        self,
        variant: "str | PolicyVariant",
        team_size: int,
        obs_dim: int,
        suffix_dim: int,
    ) -> None:
        self.variant = PolicyVariant.parse(variant)
        self.team_size = team_size
        self.obs_dim = obs_dim
        self.suffix_dim = suffix_dim
        self.mlp = MLP(
            f"{self.variant.value}/critic",
            [team_size * (obs_dim + suffix_dim), HIDDEN_UNITS, HIDDEN_UNITS, 1],
        )

    def init_params(self, rng: RngStream, dtype=TRAINING_DTYPE) -> Dict[str, Tensor]:
        return self.mlp.init(rng, dtype)

    def joint_input(self, observations: np.ndarray, suffixes: np.ndarray) -> np.ndarray:
        """(B, N, F) and (B, N, S) -> (B, N * (F + S))."""
        observations = np.asarray(observations)
        suffixes = np.asarray(suffixes)
        if observations.ndim == 2:
            observations, suffixes = observations[None], suffixes[None]
        batch, n = observations.shape[:2]
        if n != self.team_size:
            raise VariantInputError(
                f"critic was built for teams of {self.team_size}, got {n} robots"
            )
        if observations.shape[2] != self.obs_dim or suffixes.shape != (
            batch,
            n,
            self.suffix_dim,
        ):
            raise VariantInputError(
                f"critic expects observations (B, {n}, {self.obs_dim}) and suffixes "
                f"(B, {n}, {self.suffix_dim}), got {observations.shape} and {suffixes.shape}"
            )
        return np.concatenate([observations, suffixes], axis=2).reshape(batch, -1)

    def forward(
        self,
        tape: Tape,
        params: Mapping[str, Tensor],
        observations: np.ndarray,
        suffixes: np.ndarray,
    ) -> Tensor:
        x = tape.constant(self.joint_input(observations, suffixes))
        return self.mlp.forward(tape, params, x)

    def values(
        self,
        params: Mapping[str, Tensor],
        observations: np.ndarray,
        suffixes: np.ndarray,
    ) -> np.ndarray:
        tape = Tape(next(iter(params.values())).dtype)
        return self.forward(tape, params, observations, suffixes).data.reshape(-1)


def critic_forward(
    critic: Critic,
    params: Mapping[str, Tensor],
    team_observations: np.ndarray,
    suffixes: np.ndarray,
) -> float:
    return float(critic.values(params, team_observations, suffixes)[0])
