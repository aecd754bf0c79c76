# ============================================================================
# src/static/incremental.py
# ============================================================================
"""Incremental closest pair over batches of doubling size."""

from typing import Dict, List, Optional, Sequence
from src.geometry.point import PairResult, Point
from src.grid.box_index import make_box_index
from src.parallel import parallel_map
from src.static.base import StaticConfig, require_points


def incremental(
    points: Sequence[Point],
    cfg: Optional[StaticConfig] = None,
    stats: Optional[Dict] = None
) -> PairResult:
    """Insert a random permutation in doubling batches into a grid at the current side.

    A batch is inserted whole; each of its points looks for a better pair
    among the points ordered before it. The earliest such point sets the new
    side, the grid is rebuilt over the prefix through it, and the rest of
    the batch is processed again.

    Args:
        points: At least 2 points with distinct coordinates
        cfg: Seed (other fields unused)
        stats: Filled with 'rebuilds' and 'batches'

    Returns:
        The closest pair
    """
    dim = require_points(points)
    cfg = cfg or StaticConfig()
    rng = cfg.rng()
    order = [points[i] for i in rng.permutation(len(points))]
    rank = {p.id: t for t, p in enumerate(order)}

    best = PairResult.of(order[0], order[1])
    grid = make_box_index(order[:2], best.dist, dim)
    rebuilds = 0
    batches = 0
    pos = 2
    size = 2

    def candidate(x: Point) -> Optional[PairResult]:
        # Nearest earlier point by (dist, id)
        found = None
        for y in grid.neighborhood(x):
            if rank[y.id] < rank[x.id]:
                cand = PairResult.of(x, y)
                if found is None or (cand.dist, y.id) < found[0]:
                    found = ((cand.dist, y.id), cand)
        return None if found is None else found[1]

    while pos < len(order):
        batch: List[Point] = order[pos:pos + size]
        batches += 1
        while batch:
            grid.insert_batch(batch)
            found = parallel_map(candidate, batch)
            first = next((t for t, c in enumerate(found)
                          if c is not None and c.sort_key < best.sort_key), None)
            if first is None:
                pos += len(batch)
                break
            best = found[first]
            pos += first + 1
            grid = make_box_index(order[:pos], best.dist, dim)
            rebuilds += 1
            batch = batch[first + 1:]
        size *= 2

    if stats is not None:
        stats['rebuilds'] = rebuilds
        stats['batches'] = batches
    return best
