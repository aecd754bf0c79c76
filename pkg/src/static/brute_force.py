# ============================================================================
# src/static/brute_force.py
# ============================================================================
"""Brute-force closest pair, the verification oracle."""

from typing import Dict, Optional, Sequence
import numpy as np
from src.geometry.point import PairResult, Point, best_pair
from src.static.base import StaticConfig, require_points

# Screening slack between numpy and math.dist distances
_SLACK = 1e-9


def brute_force(
    points: Sequence[Point],
    cfg: Optional[StaticConfig] = None,
    stats: Optional[Dict] = None
) -> PairResult:
    """Exact minimum over all pairs, ties broken by (a, b).

    Distances are screened row by row with numpy; every pair within a
    relative slack of the screened minimum is then re-measured with the
    scalar metric so results match the other algorithms bit for bit.

    Args:
        points: At least 2 points with distinct coordinates
        cfg: Unused, accepted for a uniform signature
        stats: Filled with 'candidates' (pairs re-measured exactly)

    Returns:
        The closest pair
    """
    require_points(points)
    X = np.asarray([p.coords for p in points], dtype=float)
    n = len(points)

    row_min = np.empty(n - 1)
    for i in range(n - 1):
        row_min[i] = np.sqrt(((X[i + 1:] - X[i]) ** 2).sum(axis=1)).min()
    threshold = row_min.min() * (1 + _SLACK)

    candidates = []
    for i in np.flatnonzero(row_min <= threshold):
        d = np.sqrt(((X[i + 1:] - X[i]) ** 2).sum(axis=1))
        for j in np.flatnonzero(d <= threshold):
            candidates.append(PairResult.of(points[i], points[i + 1 + j]))

    if stats is not None:
        stats['candidates'] = len(candidates)
    return best_pair(candidates)
