# ============================================================================
# src/spatial/kdtree.py
# ============================================================================
"""Batch-dynamic spatial-median k-d tree."""

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
from src.geometry.point import Point, distance
from src.parallel import par_do
import config

Box = Tuple[Tuple[float, ...], Tuple[float, ...]]


class _Node:
    """Tree node. Leaves have entries; internal nodes have a split."""

    __slots__ = ('dim', 'value', 'left', 'right', 'count', 'box', 'entries', 'valid')

    def __init__(self):
        self.dim = -1
        self.value = 0.0
        self.left: Optional['_Node'] = None
        self.right: Optional['_Node'] = None
        self.count = 0
        self.box: Optional[Box] = None
        self.entries: Optional[List[Point]] = None
        self.valid: Optional[List[bool]] = None

    @property
    def is_leaf(self) -> bool:
        return self.entries is not None


def _merge_boxes(a: Optional[Box], b: Optional[Box]) -> Optional[Box]:
    if a is None:
        return b
    if b is None:
        return a
    lo = tuple(min(x, y) for x, y in zip(a[0], b[0]))
    hi = tuple(max(x, y) for x, y in zip(a[1], b[1]))
    return lo, hi


def _box_of(points: Sequence[Point]) -> Optional[Box]:
    if not points:
        return None
    arr = np.array([p.coords for p in points], dtype=float)
    return tuple(arr.min(axis=0).tolist()), tuple(arr.max(axis=0).tolist())


def _box_distance(box: Box, coords: Tuple[float, ...]) -> float:
    lo, hi = box
    total = 0.0
    for c, a, b in zip(coords, lo, hi):
        if c < a:
            total += (a - c) ** 2
        elif c > b:
            total += (c - b) ** 2
    return math.sqrt(total)


def _boxes_overlap(box: Box, lo: Sequence[float], hi: Sequence[float]) -> bool:
    return all(b_lo <= q_hi and q_lo <= b_hi
               for b_lo, b_hi, q_lo, q_hi in zip(box[0], box[1], lo, hi))


class DynKdTree:
    """Spatial-median k-d tree with batched insert and delete.

    Internal nodes split on the widest dimension of their points at the exact
    median value: left holds coordinates < value, right holds >= value. Leaves
    hold at most config.KD_LEAF_CAPACITY live entries; deleted entries stay in
    place, marked invalid, until the whole tree is compacted.
    """

    def __init__(self, leaf_capacity: int = config.KD_LEAF_CAPACITY):
        if leaf_capacity < 1:
            raise ValueError(f"Leaf capacity must be >= 1, got {leaf_capacity}")
        self.leaf_capacity = leaf_capacity
        self.root = self._make_leaf([])
        self._ids: Dict[int, Point] = {}
        self._invalid = 0
        self.compactions = 0

    @classmethod
    def build(cls, points: Sequence[Point], leaf_capacity: int = config.KD_LEAF_CAPACITY) -> 'DynKdTree':
        """Build a tree over points (ids must be distinct)."""
        tree = cls(leaf_capacity)
        for p in points:
            if p.id in tree._ids:
                raise ValueError(f"Duplicate point id {p.id}")
            tree._ids[p.id] = p
        tree.root = tree._build(list(points))
        return tree

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, point_id: int) -> bool:
        return point_id in self._ids

    def points(self) -> List[Point]:
        return list(self._ids.values())

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def _make_leaf(self, points: List[Point]) -> _Node:
        node = _Node()
        node.entries = list(points)
        node.valid = [True] * len(points)
        node.count = len(points)
        node.box = _box_of(points)
        return node

    def _build(self, points: List[Point]) -> _Node:
        if len(points) <= self.leaf_capacity:
            return self._make_leaf(points)

        arr = np.array([p.coords for p in points], dtype=float)
        lo, hi = arr.min(axis=0), arr.max(axis=0)
        dim = int(np.argmax(hi - lo))
        col = arr[:, dim]
        mid = len(points) // 2
        value = float(np.partition(col, mid)[mid])
        mask = col < value
        if not mask.any():
            # Many points at the minimum: split just above it
            value = float(col[col > col.min()].min())
            mask = col < value

        left_pts = [points[i] for i in np.flatnonzero(mask)]
        right_pts = [points[i] for i in np.flatnonzero(~mask)]
        if len(points) > config.PARALLEL_GRAIN:
            left, right = par_do(lambda: self._build(left_pts), lambda: self._build(right_pts))
        else:
            left, right = self._build(left_pts), self._build(right_pts)

        node = _Node()
        node.dim = dim
        node.value = value
        node.left = left
        node.right = right
        node.count = len(points)
        node.box = (tuple(lo.tolist()), tuple(hi.tolist()))
        return node

    # ------------------------------------------------------------------
    # Batch updates
    # ------------------------------------------------------------------

    def batch_insert(self, points: Sequence[Point]) -> None:
        """Insert points whose ids are not stored yet."""
        batch = set()
        for p in points:
            if p.id in self._ids or p.id in batch:
                raise ValueError(f"Point id {p.id} already stored in k-d tree")
            batch.add(p.id)
        if not points:
            return
        for p in points:
            self._ids[p.id] = p
        self.root = self._insert(self.root, list(points))

    def _insert(self, node: _Node, points: List[Point]) -> _Node:
        node.count += len(points)
        node.box = _merge_boxes(node.box, _box_of(points))
        if node.is_leaf:
            node.entries.extend(points)
            node.valid.extend([True] * len(points))
            if node.count > self.leaf_capacity:
                live = [p for p, ok in zip(node.entries, node.valid) if ok]
                self._invalid -= len(node.entries) - len(live)
                return self._build(live)
            return node

        left_pts = [p for p in points if p.coords[node.dim] < node.value]
        right_pts = [p for p in points if p.coords[node.dim] >= node.value]
        if left_pts and right_pts and len(points) > config.PARALLEL_GRAIN:
            node.left, node.right = par_do(
                lambda: self._insert(node.left, left_pts),
                lambda: self._insert(node.right, right_pts),
            )
        else:
            if left_pts:
                node.left = self._insert(node.left, left_pts)
            if right_pts:
                node.right = self._insert(node.right, right_pts)
        return node

    def batch_delete(self, ids: Sequence[int]) -> None:
        """Delete stored ids; compacts when too many entries are invalid."""
        batch = set()
        for point_id in ids:
            if point_id not in self._ids:
                raise ValueError(f"Point id {point_id} not stored in k-d tree")
            if point_id in batch:
                raise ValueError(f"Point id {point_id} listed twice in delete batch")
            batch.add(point_id)
        if not ids:
            return
        points = [self._ids.pop(i) for i in ids]
        self._delete(self.root, points, batch)
        self._invalid += len(points)

        total = len(self._ids) + self._invalid
        if self._invalid > config.KD_COMPACT_FRACTION * total:
            self.root = self._build(list(self._ids.values()))
            self._invalid = 0
            self.compactions += 1

    def _delete(self, node: _Node, points: List[Point], ids: set) -> None:
        node.count -= len(points)
        if node.is_leaf:
            for j, p in enumerate(node.entries):
                if node.valid[j] and p.id in ids:
                    node.valid[j] = False
            node.box = _box_of([p for p, ok in zip(node.entries, node.valid) if ok])
            return

        left_pts = [p for p in points if p.coords[node.dim] < node.value]
        right_pts = [p for p in points if p.coords[node.dim] >= node.value]
        if left_pts:
            self._delete(node.left, left_pts, ids)
        if right_pts:
            self._delete(node.right, right_pts, ids)
        node.box = _merge_boxes(node.left.box, node.right.box)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def range_query(self, center: Point, radius: float) -> List[Point]:
        """Stored points within the closed ball around center, excluding center's id."""
        if radius < 0:
            raise ValueError(f"Radius must be non-negative, got {radius}")
        out: List[Point] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.count == 0 or node.box is None:
                continue
            if _box_distance(node.box, center.coords) > radius:
                continue
            if node.is_leaf:
                for p, ok in zip(node.entries, node.valid):
                    if ok and p.id != center.id and distance(p, center) <= radius:
                        out.append(p)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def rect_query(
        self,
        lo: Sequence[float],
        hi: Sequence[float],
        accept: Optional[Callable[[Point], bool]] = None,
        first_only: bool = False
    ) -> List[Point]:
        """Stored points with lo <= coords <= hi in every dimension.

        Args:
            lo: Lower corner
            hi: Upper corner
            accept: Optional extra filter
            first_only: Stop after the first accepted point
        """
        out: List[Point] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.count == 0 or node.box is None or not _boxes_overlap(node.box, lo, hi):
                continue
            if node.is_leaf:
                for p, ok in zip(node.entries, node.valid):
                    if not ok:
                        continue
                    if all(a <= c <= b for c, a, b in zip(p.coords, lo, hi)) and (accept is None or accept(p)):
                        out.append(p)
                        if first_only:
                            return out
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    # ------------------------------------------------------------------
    # Audit
    # ------------------------------------------------------------------

    def audit(self) -> List[str]:
        """Recompute counts and boxes from the leaves; return mismatches."""
        errors: List[str] = []

        def visit(node: _Node, bounds: List[Tuple[float, float]]) -> Tuple[int, Optional[Box]]:
            if node.is_leaf:
                live = [p for p, ok in zip(node.entries, node.valid) if ok]
                if len(live) > self.leaf_capacity:
                    errors.append(f"leaf holds {len(live)} live points")
                for p in live:
                    for d, (a, b) in enumerate(bounds):
                        if not (a <= p.coords[d] < b):
                            errors.append(f"point {p.id} violates split on dim {d}")
                count, box = len(live), _box_of(live)
            else:
                left_bounds = list(bounds)
                right_bounds = list(bounds)
                a, b = bounds[node.dim]
                left_bounds[node.dim] = (a, min(b, node.value))
                right_bounds[node.dim] = (max(a, node.value), b)
                lc, lb = visit(node.left, left_bounds)
                rc, rb = visit(node.right, right_bounds)
                count, box = lc + rc, _merge_boxes(lb, rb)
            if count != node.count:
                errors.append(f"node count {node.count} != {count}")
            if box != node.box:
                errors.append(f"node box {node.box} != {box}")
            return count, box

        k = len(next(iter(self._ids.values())).coords) if self._ids else 0
        total, _ = visit(self.root, [(-math.inf, math.inf)] * k)
        if total != len(self._ids):
            errors.append(f"tree holds {total} live points, index holds {len(self._ids)}")
        return errors
