from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from capteamcli.nets.layers import HIDDEN_UNITS, MLP
from capteamcli.tensorcore import RngStream, Tape, Tensor
from capteamcli.tensorcore.tensor import TRAINING_DTYPE

logger = logging.getLogger(__name__)

NUM_ACTIONS = 5
# Training pool: five teams of four robots.
ID_DIM = 20


class VariantInputError(ValueError):
    """Raised when a batch lacks, or mis-sizes, the inputs a variant needs."""


class GraphError(ValueError):
    """Raised for malformed communication graphs."""


class PolicyVariant(str, Enum):
    ID_MLP = "id_mlp"
    ID_GNN = "id_gnn"
    CA_MLP = "ca_mlp"
    CA_GNN = "ca_gnn"
    CA_CC_GNN = "ca_cc_gnn"

    @property
    def uses_ids(self) -> bool:
        return self in (PolicyVariant.ID_MLP, PolicyVariant.ID_GNN)

    @property
    def uses_graph(self) -> bool:
        return self in (
            PolicyVariant.ID_GNN,
            PolicyVariant.CA_GNN,
            PolicyVariant.CA_CC_GNN,
        )

    @classmethod
    def parse(cls, value: "str | PolicyVariant") -> "PolicyVariant":
        if isinstance(value, PolicyVariant):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise VariantInputError(
                f"unknown policy variant {value!r}; expected one of {valid}"
            ) from None


@dataclass(frozen=True)
class GraphBatch:
    """Per-robot inputs of one team at one step (or several stacked teams).

    ``node_features`` holds observations without any identity suffix; the
    variant decides whether ``capabilities`` or ``ids`` are appended.
    """

    node_features: np.ndarray
    adjacency: np.ndarray
    capabilities: Optional[np.ndarray] = None
    ids: Optional[np.ndarray] = None

    @classmethod
    def fully_connected(
        cls,
        node_features: np.ndarray,
        capabilities: Optional[np.ndarray] = None,
        ids: Optional[np.ndarray] = None,
    ) -> "GraphBatch":
        n = np.asarray(node_features).shape[0]
        return cls(
            np.asarray(node_features),
            np.ones((n, n), dtype=np.int8),
            None if capabilities is None else np.asarray(capabilities),
            None if ids is None else np.asarray(ids),
        )

    @property
    def num_nodes(self) -> int:
        return int(self.node_features.shape[0])

    @staticmethod
    def stack(batches: Sequence["GraphBatch"]) -> "GraphBatch":
        """Disjoint union: block-diagonal adjacency, rows concatenated in order."""
        if not batches:
            raise GraphError("cannot stack an empty list of graphs")
        total = sum(b.num_nodes for b in batches)
        adjacency = np.zeros((total, total), dtype=np.int8)
        offset = 0
        for b in batches:
            n = b.num_nodes
            adjacency[offset : offset + n, offset : offset + n] = b.adjacency
            offset += n

        def _cat(field: str) -> Optional[np.ndarray]:
            parts = [getattr(b, field) for b in batches]
            if any(p is None for p in parts):
                return None
            return np.concatenate(parts, axis=0)

        return GraphBatch(
            np.concatenate([b.node_features for b in batches], axis=0),
            adjacency,
            _cat("capabilities"),
            _cat("ids"),
        )

    def permuted(self, order: Sequence[int]) -> "GraphBatch":
        order = np.asarray(order)
        return GraphBatch(
            self.node_features[order],
            self.adjacency[np.ix_(order, order)],
            None if self.capabilities is None else self.capabilities[order],
            None if self.ids is None else self.ids[order],
        )


def team_batch(
    variant: "str | PolicyVariant", observations: np.ndarray, suffix: np.ndarray
) -> GraphBatch:
    """Fully connected batch with ``suffix`` filed as ids or capabilities."""
    if PolicyVariant.parse(variant).uses_ids:
        return GraphBatch.fully_connected(observations, ids=suffix)
    return GraphBatch.fully_connected(observations, capabilities=suffix)


def aggregation_edges(adjacency: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return (source, target) rows for sums over N(i) plus i itself."""
    adjacency = np.asarray(adjacency)
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise GraphError(f"adjacency must be square, got shape {adjacency.shape}")
    if not np.array_equal(adjacency, adjacency.T):
        raise GraphError("adjacency must be symmetric")
    linked = (adjacency != 0) | np.eye(adjacency.shape[0], dtype=bool)
    target, source = np.nonzero(linked)
    return source, target


def gcn_layer(
    tape: Tape,
    node_features: Tensor,
    adjacency: np.ndarray,
    phi: Callable[[Tensor], Tensor],
    activation: Optional[Callable[[Tensor], Tensor]] = None,
) -> Tensor:
    """h_i = activation(sum over j in N(i) and i of phi(h_j)); ReLU by default."""
    n = node_features.shape[0]
    if np.asarray(adjacency).shape != (n, n):
        raise GraphError(
            f"adjacency shape {np.asarray(adjacency).shape} does not match {n} nodes"
        )
    source, target = aggregation_edges(adjacency)
    messages = phi(node_features)
    gathered = tape.gather_rows(messages, source)
    summed = tape.scatter_add_rows(gathered, target, n)
    return (activation or tape.relu)(summed)


@dataclass(frozen=True)
class ActionDistribution:
    logits: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        z = np.asarray(self.logits, dtype=np.float64)
        z = z - z.max(axis=-1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=-1, keepdims=True)

    @property
    def log_probabilities(self) -> np.ndarray:
        z = np.asarray(self.logits, dtype=np.float64)
        z = z - z.max(axis=-1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class Policy:
    """Shared decentralized policy for one variant.

    The object only describes the architecture; parameters are passed in as a
    name -> Tensor mapping so that several rollouts can share them read-only.
    """

    def __init__(
        self,
        variant: "str | PolicyVariant",
        obs_dim: int,
        capability_dim: int,
        id_dim: int = ID_DIM,
    ) -> None:
        self.variant = PolicyVariant.parse(variant)
        self.obs_dim = obs_dim
        self.capability_dim = capability_dim
        self.id_dim = id_dim
        self.suffix_dim = id_dim if self.variant.uses_ids else capability_dim
        v = self.variant.value
        self.mlp: Optional[MLP] = None
        self.encoder: Optional[MLP] = None
        self.phi: Optional[MLP] = None
        self.action: Optional[MLP] = None
        if not self.variant.uses_graph:
            # Four weight layers: three hidden layers of 64 and the logits.
            sizes = [obs_dim + self.suffix_dim] + [HIDDEN_UNITS] * 3 + [NUM_ACTIONS]
            self.mlp = MLP(f"{v}/mlp", sizes)
        else:
            encoder_in = obs_dim
            action_in = 2 * HIDDEN_UNITS
            if self.variant is PolicyVariant.CA_GNN:
                action_in += capability_dim
            else:
                encoder_in += self.suffix_dim
            self.encoder = MLP(f"{v}/encoder", [encoder_in, HIDDEN_UNITS, HIDDEN_UNITS])
            self.phi = MLP(f"{v}/gcn", [HIDDEN_UNITS] * 3)
            self.action = MLP(f"{v}/action", [action_in, HIDDEN_UNITS, NUM_ACTIONS])

    @property
    def subnets(self) -> List[MLP]:
        return [m for m in (self.mlp, self.encoder, self.phi, self.action) if m]

    def init_params(self, rng: RngStream, dtype=TRAINING_DTYPE) -> Dict[str, Tensor]:
        params: Dict[str, Tensor] = {}
        for subnet in self.subnets:
            params.update(subnet.init(rng, dtype))
        return params

    def suffix(self, batch: GraphBatch) -> np.ndarray:
        if self.variant.uses_ids:
            if batch.ids is None:
                raise VariantInputError(f"{self.variant.value} needs one-hot robot ids")
            values, width, label = batch.ids, self.id_dim, "one-hot id"
        else:
            if batch.capabilities is None:
                raise VariantInputError(
                    f"{self.variant.value} needs robot capability vectors"
                )
            values, width, label = batch.capabilities, self.capability_dim, "capability"
        values = np.asarray(values)
        if values.shape != (batch.num_nodes, width):
            raise VariantInputError(
                f"{self.variant.value}: {label} block has shape {values.shape}, "
                f"expected ({batch.num_nodes}, {width})"
            )
        return values

    def encoder_forward(
        self, tape: Tape, params: Mapping[str, Tensor], features: Tensor
    ) -> Tensor:
        if self.encoder is None:
            raise VariantInputError(f"{self.variant.value} has no encoder network")
        expected = self.encoder.in_features
        if features.data.ndim != 2 or features.shape[1] != expected:
            layout = (
                f"observation({self.obs_dim})"
                if self.variant is PolicyVariant.CA_GNN
                else f"observation({self.obs_dim}) + suffix({self.suffix_dim})"
            )
            raise VariantInputError(
                f"encoder expects N x {expected} features laid out as {layout}, "
                f"got {features.shape}"
            )
        return self.encoder.forward(tape, params, features, activate_output=False)

    def forward(
        self,
        tape: Tape,
        params: Mapping[str, Tensor],
        batch: GraphBatch,
        trace: Optional[Dict[str, Tuple[int, ...]]] = None,
    ) -> Tensor:
        """Build N x 5 logits on ``tape``; ``trace`` collects intermediate shapes."""
        obs = np.asarray(batch.node_features)
        if obs.ndim != 2 or obs.shape[1] != self.obs_dim:
            raise VariantInputError(
                f"{self.variant.value}: observations must be N x {self.obs_dim}, "
                f"got {obs.shape}"
            )
        suffix = self.suffix(batch)
        trace = trace if trace is not None else {}

        if self.mlp is not None:
            x = tape.constant(np.concatenate([obs, suffix], axis=1))
            trace["input"] = x.shape
            logits = self.mlp.forward(tape, params, x)
        else:
            assert self.phi is not None and self.action is not None
            if self.variant is PolicyVariant.CA_GNN:
                x = tape.constant(obs)
            else:
                x = tape.constant(np.concatenate([obs, suffix], axis=1))
            trace["input"] = x.shape
            encoded = self.encoder_forward(tape, params, x)
            trace["encoder"] = encoded.shape
            phi = self.phi

            def transform(h: Tensor) -> Tensor:
                return phi.forward(tape, params, h)

            communicated = gcn_layer(tape, encoded, batch.adjacency, transform)
            trace["gcn"] = communicated.shape
            parts = [encoded, communicated]
            if self.variant is PolicyVariant.CA_GNN:
                parts.append(tape.constant(suffix))
            joined = tape.concat(parts, axis=1)
            trace["pre_action"] = joined.shape
            logits = self.action.forward(tape, params, joined)
        trace["logits"] = logits.shape
        return logits

    def distribution(
        self, params: Mapping[str, Tensor], batch: GraphBatch
    ) -> ActionDistribution:
        tape = Tape(next(iter(params.values())).dtype)
        return ActionDistribution(self.forward(tape, params, batch).data)


def encoder_forward(
    policy: Policy, tape: Tape, params: Mapping[str, Tensor], features: Tensor
) -> Tensor:
    return policy.encoder_forward(tape, params, features)


def policy_forward(
    policy: Policy, params: Mapping[str, Tensor], batch: GraphBatch
) -> ActionDistribution:
    return policy.distribution(params, batch)
