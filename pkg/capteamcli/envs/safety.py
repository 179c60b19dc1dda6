"""Pairwise displacement scaling that keeps robots a minimum distance apart.

Robots move in straight lines over a step, so for any pair the relative
position along the step is ``r + s * v`` for ``s`` in ``[0, 1]``, with ``r``
the current offset and ``v`` the difference of the two displacements. A pair
is safe when that segment never comes closer than the minimum separation,
which also rules out two robots passing through each other.
"""

from __future__ import annotations

import logging
import math
from typing import List, Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_MIN_SEPARATION = 0.17
# Rounding slack when comparing a path distance against its threshold.
PATH_TOLERANCE = 1e-12


def _closest_on_path(r: np.ndarray, v: np.ndarray, upto: float = 1.0) -> np.ndarray:
    """Smallest ``|r + s v|`` over ``s`` in ``[0, upto]``, row by row."""
    vv = np.einsum("ij,ij->i", v, v)
    rv = np.einsum("ij,ij->i", r, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(vv > 0.0, np.clip(-rv / vv, 0.0, upto), 0.0)
    return np.linalg.norm(r + s[:, None] * v, axis=1)


def _pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _thresholds(r: np.ndarray, min_separation: float) -> np.ndarray:
    # A pair already inside the separation may not get any closer.
    return np.minimum(min_separation, np.linalg.norm(r, axis=1))


def _violations(
    positions: np.ndarray, displacements: np.ndarray, min_separation: float
) -> List[Tuple[int, int]]:
    rows, cols = _pairs(positions.shape[0])
    r = positions[rows] - positions[cols]
    v = displacements[rows] - displacements[cols]
    bad = _closest_on_path(r, v) < _thresholds(r, min_separation) - PATH_TOLERANCE
    return list(zip(rows[bad].tolist(), cols[bad].tolist()))


def closest_approach(positions, displacements) -> float:
    """Smallest distance between any two robots at any point of the step."""
    positions = np.asarray(positions, dtype=np.float64)
    displacements = np.asarray(displacements, dtype=np.float64)
    if positions.shape[0] < 2:
        return math.inf
    rows, cols = _pairs(positions.shape[0])
    r = positions[rows] - positions[cols]
    v = displacements[rows] - displacements[cols]
    return float(_closest_on_path(r, v).min())


def _largest_safe_scale(
    r: np.ndarray, v: np.ndarray, threshold: float, iterations: int
) -> float:
    # Distance along the path is convex in s and starts at or above the
    # threshold, so the safe scales form a prefix [0, s*].
    r, v = r[None, :], v[None, :]
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _closest_on_path(r, v, upto=mid)[0] >= threshold - PATH_TOLERANCE:
            lo = mid
        else:
            hi = mid
    return lo


def safety_filter(
    positions,
    proposed_displacements,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    iterations: int = 20,
    max_sweeps: int = 10,
) -> np.ndarray:
    """Scale displacements so no pair comes closer than ``min_separation`` during the step.

    Every violating pair has both displacements multiplied by the largest
    common factor, found by bisection, that keeps its whole path clear. Sweeps
    repeat until no pair violates or ``max_sweeps`` runs out; any robot still
    in a violating pair after that is frozen in place.
    """
    positions = np.asarray(positions, dtype=np.float64)
    displacements = np.array(proposed_displacements, dtype=np.float64, copy=True)
    if displacements.shape != positions.shape:
        raise ValueError(
            f"displacements {displacements.shape} do not match positions {positions.shape}"
        )

    for _ in range(max_sweeps):
        pairs = _violations(positions, displacements, min_separation)
        if not pairs:
            return displacements
        for i, j in pairs:
            r = positions[i] - positions[j]
            v = displacements[i] - displacements[j]
            threshold = float(_thresholds(r[None, :], min_separation)[0])
            closest = _closest_on_path(r[None, :], v[None, :])[0]
            if closest >= threshold - PATH_TOLERANCE:
                continue
            scale = _largest_safe_scale(r, v, threshold, iterations)
            displacements[i] *= scale
            displacements[j] *= scale

    frozen = 0
    while True:
        pairs = _violations(positions, displacements, min_separation)
        moving = {k for pair in pairs for k in pair if np.any(displacements[k] != 0.0)}
        if not moving:
            break
        for k in moving:
            displacements[k] = 0.0
        frozen += len(moving)
    if frozen:
        logger.debug(
            "safety filter froze %d robot(s) after %d sweeps", frozen, max_sweeps
        )
    return displacements
