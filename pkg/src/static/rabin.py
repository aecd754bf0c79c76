# ============================================================================
# src/static/rabin.py
# ============================================================================
"""Sampling-based closest pair: a grid at the sample's closest-pair distance."""

import math
from typing import Dict, Optional, Sequence
import numpy as np
from src.geometry.point import PairResult, Point, best_pair
from src.grid.box_index import make_box_index
from src.parallel import parallel_map
from src.static.base import StaticConfig, nearest_pairs, require_points
from src.static.brute_force import brute_force


def _rabin(points: Sequence[Point], dim: int, cfg: StaticConfig,
           rng: np.random.Generator, stats: Dict) -> PairResult:
    n = len(points)
    if n <= cfg.cutoff:
        return brute_force(points)

    size = min(n - 1, max(2, math.ceil(n ** cfg.sample_exponent)))
    picks = np.sort(rng.choice(n, size=size, replace=False))
    sample = _rabin([points[i] for i in picks], dim, cfg, rng, {})
    side = sample.dist

    grid = make_box_index(points, side, dim)
    chunks = parallel_map(lambda c: nearest_pairs(grid, c),
                          [points[i:i + 256] for i in range(0, n, 256)], grain=1)
    result = best_pair(pair for chunk in chunks for pair in chunk)
    if result is None or result.dist > side:
        raise AssertionError(f"Grid side {side} is below the closest-pair distance found")
    stats['sample_side'] = side
    stats['sample_size'] = size
    return result


def rabin(
    points: Sequence[Point],
    cfg: Optional[StaticConfig] = None,
    stats: Optional[Dict] = None
) -> PairResult:
    """Closest pair from a grid whose side is the closest-pair distance of a sample.

    The sample of ceil(n^c) points is drawn without replacement and solved
    recursively; every pair closer than its distance lies in adjacent boxes.

    Args:
        points: At least 2 points with distinct coordinates
        cfg: Sample exponent, cutoff and seed
        stats: Filled with 'sample_side' and 'sample_size' of the top level

    Returns:
        The closest pair
    """
    dim = require_points(points)
    cfg = cfg or StaticConfig()
    out: Dict = {}
    result = _rabin(list(points), dim, cfg, cfg.rng(), out)
    if stats is not None:
        stats.update(out)
    return result
