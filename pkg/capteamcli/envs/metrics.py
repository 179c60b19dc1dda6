"""Sensor-network geometry: disk overlap area and sensing-graph connectivity."""

from __future__ import annotations

import math

import networkx as nx
import numpy as np


def _check_radii(positions: np.ndarray, radii: np.ndarray) -> None:
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise ValueError(f"positions must be N x 2, got {positions.shape}")
    if radii.shape != (positions.shape[0],):
        raise ValueError(
            f"expected {positions.shape[0]} radii, got shape {radii.shape}"
        )
    if np.any(radii <= 0):
        raise ValueError(f"radii must be > 0: {radii.tolist()}")


def pairwise_distances(positions) -> np.ndarray:
    positions = np.asarray(positions, dtype=np.float64)
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def lens_area(distance: float, r_i: float, r_j: float) -> float:
    """Area shared by two disks whose centers are ``distance`` apart."""
    if distance >= r_i + r_j:
        return 0.0
    if distance <= abs(r_i - r_j):
        return math.pi * min(r_i, r_j) ** 2
    cos_i = (distance**2 + r_i**2 - r_j**2) / (2.0 * distance * r_i)
    cos_j = (distance**2 + r_j**2 - r_i**2) / (2.0 * distance * r_j)
    kite = (
        (-distance + r_i + r_j)
        * (distance + r_i - r_j)
        * (distance - r_i + r_j)
        * (distance + r_i + r_j)
    )
    return (
        r_i**2 * math.acos(min(1.0, max(-1.0, cos_i)))
        + r_j**2 * math.acos(min(1.0, max(-1.0, cos_j)))
        - 0.5 * math.sqrt(max(0.0, kite))
    )


def pairwise_overlap(positions, radii) -> float:
    positions = np.asarray(positions, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64).reshape(-1)
    _check_radii(positions, radii)
    distances = pairwise_distances(positions)
    n = positions.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += lens_area(float(distances[i, j]), float(radii[i]), float(radii[j]))
    return total


def sensing_graph(positions, radii) -> nx.Graph:
    """Edge (i, j) whenever the two sensing disks touch or overlap."""
    positions = np.asarray(positions, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64).reshape(-1)
    _check_radii(positions, radii)
    distances = pairwise_distances(positions)
    reach = radii[:, None] + radii[None, :]
    graph = nx.Graph()
    graph.add_nodes_from(range(positions.shape[0]))
    rows, cols = np.nonzero(np.triu(distances <= reach, k=1))
    graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
    return graph


def connectivity_check(positions, radii) -> bool:
    return bool(nx.is_connected(sensing_graph(positions, radii)))


def min_pairwise_distance(positions) -> float:
    """Smallest center distance; infinite for a single robot."""
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape[0] < 2:
        return math.inf
    distances = pairwise_distances(positions)
    return float(distances[np.triu_indices(positions.shape[0], k=1)].min())
