# ============================================================================
# src/grid/box_index.py
# ============================================================================
"""Grid dictionary whose neighborhood queries go through a k-d tree."""

from typing import List, Optional, Sequence, Set, Tuple
from src.geometry.point import GridKey, Point, distance, grid_key, keys_adjacent
from src.grid.grid_dict import GridDict
from src.spatial.kdtree import DynKdTree
import config


class KdBoxIndex(GridDict):
    """GridDict for high dimensions.

    Enumerating 3^k boxes gets expensive from k = 5 on, so neighborhood
    queries run a rectangle query over the boxes around p's box and keep the
    hits whose key is adjacent to p's key. Results equal GridDict's.
    """

    def __init__(self, side: float):
        super().__init__(side)
        self.tree = DynKdTree()

    def insert_batch(self, points: Sequence[Point]) -> None:
        super().insert_batch(points)
        self.tree.batch_insert(points)

    def delete_batch(self, ids: Sequence[int]) -> None:
        super().delete_batch(ids)
        self.tree.batch_delete(ids)

    def _window(self, key: GridKey) -> Tuple[List[float], List[float]]:
        # Half a box of slack on each side absorbs floor rounding
        side = self.side
        lo = [(c - 1.5) * side for c in key]
        hi = [(c + 2.5) * side for c in key]
        return lo, hi

    def neighborhood(self, p: Point) -> List[Point]:
        key = grid_key(p, self.side)
        lo, hi = self._window(key)
        return self.tree.rect_query(
            lo, hi, accept=lambda q: q.id != p.id and keys_adjacent(self._key_of[q.id], key)
        )

    def is_sparse(self, p: Point) -> bool:
        key = grid_key(p, self.side)
        lo, hi = self._window(key)
        hits = self.tree.rect_query(
            lo, hi,
            accept=lambda q: q.id != p.id and keys_adjacent(self._key_of[q.id], key),
            first_only=True,
        )
        return not hits

    def newly_sparse(self, deleted: Sequence[Point], ids: Set[int]) -> List[Point]:
        found = {}
        for x in deleted:
            for r in self.neighborhood(x):
                if r.id in ids or r.id in found:
                    continue
                key = self._key_of[r.id]
                lo, hi = self._window(key)
                blocker = self.tree.rect_query(
                    lo, hi,
                    accept=lambda q: (q.id != r.id and q.id not in ids
                                      and keys_adjacent(self._key_of[q.id], key)),
                    first_only=True,
                )
                if not blocker:
                    found[r.id] = r
        return [found[i] for i in sorted(found)]

    def nearest_in_neighborhood(self, p: Point) -> Optional[Tuple[Point, float]]:
        best = None
        for q in self.neighborhood(p):
            d = distance(p, q)
            if best is None or (d, q.id) < (best[1], best[0].id):
                best = (q, d)
        return best


def make_box_index(points: Sequence[Point], side: float, dim: int) -> GridDict:
    """Grid over points at the given side; k-d tree backed from config.KD_TREE_MIN_DIM up."""
    if dim >= config.KD_TREE_MIN_DIM:
        return KdBoxIndex.build(points, side)
    return GridDict.build(points, side)
