"""Shared decentralized policies (ID/CA x MLP/GNN) and the centralized critic."""

from capteamcli.nets.actions import (
    ActionSelection,
    SelectionMode,
    action_select,
)
from capteamcli.nets.critic import Critic, critic_forward
from capteamcli.nets.layers import HIDDEN_UNITS, MLP
from capteamcli.nets.policies import (
    ID_DIM,
    NUM_ACTIONS,
    ActionDistribution,
    GraphBatch,
    GraphError,
    Policy,
    PolicyVariant,
    VariantInputError,
    encoder_forward,
    gcn_layer,
    policy_forward,
    team_batch,
)

__all__ = [
    "ActionDistribution",
    "ActionSelection",
    "Critic",
    "GraphBatch",
    "GraphError",
    "HIDDEN_UNITS",
    "ID_DIM",
    "MLP",
    "NUM_ACTIONS",
    "Policy",
    "PolicyVariant",
    "SelectionMode",
    "VariantInputError",
    "action_select",
    "critic_forward",
    "encoder_forward",
    "gcn_layer",
    "policy_forward",
    "team_batch",
]
