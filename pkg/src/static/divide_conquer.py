# ============================================================================
# src/static/divide_conquer.py
# ============================================================================
"""Divide-and-conquer closest pair with a sorted central slab."""

from typing import Dict, List, Optional, Sequence, Tuple
from src.geometry.point import PairResult, Point, best_pair, distance
from src.parallel import par_do
from src.static.base import StaticConfig, require_points, scan_pairs


def _slab_pair(slab: List[Point], axis: int, best: PairResult) -> PairResult:
    slab.sort(key=lambda p: (p.coords[axis], p.id))
    for i, p in enumerate(slab):
        for q in slab[i + 1:]:
            if q.coords[axis] - p.coords[axis] > best.dist:
                break
            d = distance(p, q)
            if d <= best.dist:
                cand = PairResult.of(p, q, d)
                if cand.sort_key < best.sort_key:
                    best = cand
    return best


def _solve(pts: List[Point], cutoff: int, axis: int) -> Tuple[PairResult, int]:
    """Closest pair of pts (sorted on dimension 0) and the number of leaves."""
    if len(pts) <= cutoff:
        return scan_pairs(pts), 1

    mid = len(pts) // 2
    plane = pts[mid].coords[0]
    (left, n_left), (right, n_right) = par_do(
        lambda: _solve(pts[:mid], cutoff, axis),
        lambda: _solve(pts[mid:], cutoff, axis),
    )
    best = best_pair([left, right])

    # Non-strict bound keeps tied cross pairs in play
    slab = [p for p in pts if abs(p.coords[0] - plane) <= best.dist]
    return _slab_pair(slab, axis, best), n_left + n_right


def divide_conquer(
    points: Sequence[Point],
    cfg: Optional[StaticConfig] = None,
    stats: Optional[Dict] = None
) -> PairResult:
    """Split on dimension 0 at the median, recurse in parallel, merge through the slab.

    Args:
        points: At least 2 points with distinct coordinates
        cfg: Base-case cutoff (other fields unused)
        stats: Filled with 'leaves' (brute-force base cases)

    Returns:
        The closest pair
    """
    dim = require_points(points)
    cfg = cfg or StaticConfig()
    pts = sorted(points, key=lambda p: (p.coords[0], p.id))
    # The slab is sorted on dimension 1, or dimension 0 for k = 1
    axis = 1 if dim > 1 else 0
    result, leaves = _solve(pts, cfg.cutoff, axis)
    if stats is not None:
        stats['leaves'] = leaves
    return result
