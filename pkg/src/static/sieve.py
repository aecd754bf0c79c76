# ============================================================================
# src/static/sieve.py
# ============================================================================
"""Sieve closest pair: peel sparse points round by round, then one final grid."""

from typing import Dict, Optional, Sequence
from src.geometry.point import PairResult, Point, best_pair, distance
from src.grid.box_index import make_box_index
from src.parallel import parallel_map, parallel_min
from src.static.base import StaticConfig, nearest_pairs, require_points


def sieve(
    points: Sequence[Point],
    cfg: Optional[StaticConfig] = None,
    stats: Optional[Dict] = None
) -> PairResult:
    """Closest pair by the sparse-partition rounds without heaps.

    Each round picks a random pivot, sets the box side to d/(6k) where d is
    the pivot's nearest-neighbor distance, and drops the sparse points. The
    last round's d is a real pair distance, so it bounds the closest pair
    from above and a grid at that side finds it.

    Args:
        points: At least 2 points with distinct coordinates
        cfg: Seed (other fields unused)
        stats: Filled with 'rounds' and 'final_side'

    Returns:
        The closest pair
    """
    dim = require_points(points)
    cfg = cfg or StaticConfig()
    rng = cfg.rng()

    current = list(points)
    rounds = 0
    d_last = None
    while current:
        ordered = sorted(current, key=lambda p: p.id)
        pivot = ordered[int(rng.integers(len(ordered)))]
        d_last, _ = parallel_min(
            lambda q: None if q.id == pivot.id else (distance(pivot, q), q.id), current
        )
        grid = make_box_index(current, d_last / (6 * dim), dim)
        flags = parallel_map(grid.is_sparse, current)
        current = [p for p, sparse in zip(current, flags) if not sparse]
        rounds += 1

    grid = make_box_index(points, d_last, dim)
    chunks = parallel_map(lambda c: nearest_pairs(grid, c),
                          [points[i:i + 256] for i in range(0, len(points), 256)], grain=1)
    if stats is not None:
        stats['rounds'] = rounds
        stats['final_side'] = d_last
    return best_pair(pair for chunk in chunks for pair in chunk)
