"""Capability-aware multi-robot reinforcement learning from the command line."""
