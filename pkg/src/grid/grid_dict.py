# ============================================================================
# src/grid/grid_dict.py
# ============================================================================
"""Hashed grid dictionary from box keys to point buckets."""

import math
import threading
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple
from src.geometry.point import (
    GridKey,
    Point,
    distance,
    grid_key,
    neighborhood_keys,
)
from src.parallel import parallel_map
import config

_MASK64 = (1 << 64) - 1
_MULT = 0x9E3779B97F4A7C15


def hash_key(key: GridKey) -> int:
    """Deterministic 64-bit multiply-xor mix of the key components."""
    h = 0
    for c in key:
        h = ((h ^ (c & _MASK64)) * _MULT) & _MASK64
        h ^= h >> 29
    return h


class GridDict:
    """Points bucketed by grid box at a fixed side length.

    Box keys live in a power-of-two number of shards picked by hash_key, so a
    batch splits into per-shard groups that are applied in parallel. Buckets are
    lists with swap-remove deletion.

    One mutator at a time; queries may run concurrently with each other.
    """

    def __init__(self, side: float):
        if not math.isfinite(side) or side <= 0:
            raise ValueError(f"Grid side must be positive and finite, got {side}")
        self.side = float(side)
        self._shards: List[Dict[GridKey, List[int]]] = [
            {} for _ in range(max(1, config.GRID_MIN_SHARDS))
        ]
        self._n_boxes = 0
        self._points: Dict[int, Point] = {}
        self._key_of: Dict[int, GridKey] = {}
        self._slot: Dict[int, int] = {}

        # Per-box counters for box_only_contains, reset lazily by epoch
        self._count_lock = threading.Lock()
        self._epoch = 0
        self._stamps: Dict[GridKey, Tuple[int, int]] = {}

    @classmethod
    def build(cls, points: Sequence[Point], side: float) -> 'GridDict':
        """Build a grid holding exactly the given points."""
        grid = cls(side)
        grid.insert_batch(points)
        return grid

    # ------------------------------------------------------------------
    # Size and lookup
    # ------------------------------------------------------------------

    @property
    def count(self) -> int:
        return len(self._points)

    def __len__(self) -> int:
        return len(self._points)

    def __contains__(self, point_id: int) -> bool:
        return point_id in self._points

    @property
    def n_shards(self) -> int:
        return len(self._shards)

    @property
    def n_boxes(self) -> int:
        return self._n_boxes

    def point(self, point_id: int) -> Point:
        return self._points[point_id]

    def points(self) -> List[Point]:
        return list(self._points.values())

    def ids(self) -> List[int]:
        return list(self._points.keys())

    def key_of(self, point_id: int) -> GridKey:
        return self._key_of[point_id]

    def _bucket(self, key: GridKey) -> Optional[List[int]]:
        return self._shards[hash_key(key) & (len(self._shards) - 1)].get(key)

    def keys(self) -> List[GridKey]:
        return [key for shard in self._shards for key in shard]

    def box(self, key: GridKey) -> List[Point]:
        bucket = self._bucket(key)
        return [self._points[i] for i in bucket] if bucket else []

    def box_size(self, key: GridKey) -> int:
        bucket = self._bucket(key)
        return len(bucket) if bucket else 0

    # ------------------------------------------------------------------
    # Batch updates
    # ------------------------------------------------------------------

    def _reserve(self, extra_boxes: int) -> None:
        capacity = config.GRID_SHARD_SLOTS * config.GRID_MAX_LOAD
        n_shards = len(self._shards)
        while self._n_boxes + extra_boxes > capacity * n_shards:
            n_shards *= 2
        if n_shards == len(self._shards):
            return
        shards: List[Dict[GridKey, List[int]]] = [{} for _ in range(n_shards)]
        for shard in self._shards:
            for key, bucket in shard.items():
                shards[hash_key(key) & (n_shards - 1)][key] = bucket
        self._shards = shards

    def _group_by_shard(self, keyed: Iterable[Tuple[int, GridKey]]) -> List[Tuple[int, List[Tuple[int, GridKey]]]]:
        groups: Dict[int, List[Tuple[int, GridKey]]] = {}
        mask = len(self._shards) - 1
        for point_id, key in keyed:
            groups.setdefault(hash_key(key) & mask, []).append((point_id, key))
        return list(groups.items())

    def insert_batch(self, points: Sequence[Point]) -> None:
        """Insert a batch of points whose ids are not yet stored."""
        batch_ids = set()
        for p in points:
            if p.id in self._points or p.id in batch_ids:
                raise ValueError(f"Point id {p.id} already stored in grid")
            batch_ids.add(p.id)
        if not points:
            return

        side = self.side
        keys = parallel_map(lambda p: grid_key(p, side), points)
        self._reserve(len(points))
        for p, key in zip(points, keys):
            self._points[p.id] = p
            self._key_of[p.id] = key

        def apply(group: Tuple[int, List[Tuple[int, GridKey]]]) -> int:
            shard = self._shards[group[0]]
            new_boxes = 0
            for point_id, key in group[1]:
                bucket = shard.get(key)
                if bucket is None:
                    bucket = []
                    shard[key] = bucket
                    new_boxes += 1
                self._slot[point_id] = len(bucket)
                bucket.append(point_id)
            return new_boxes

        groups = self._group_by_shard((p.id, key) for p, key in zip(points, keys))
        self._n_boxes += sum(parallel_map(apply, groups, grain=1))

    def delete_batch(self, ids: Sequence[int]) -> None:
        """Delete a batch of stored point ids."""
        batch_ids = set()
        for point_id in ids:
            if point_id not in self._points:
                raise ValueError(f"Point id {point_id} not stored in grid")
            if point_id in batch_ids:
                raise ValueError(f"Point id {point_id} listed twice in delete batch")
            batch_ids.add(point_id)
        if not ids:
            return

        def apply(group: Tuple[int, List[Tuple[int, GridKey]]]) -> int:
            shard = self._shards[group[0]]
            removed_boxes = 0
            for point_id, key in group[1]:
                bucket = shard[key]
                slot = self._slot[point_id]
                last = bucket.pop()
                if last != point_id:
                    bucket[slot] = last
                    self._slot[last] = slot
                if not bucket:
                    del shard[key]
                    removed_boxes += 1
            return removed_boxes

        groups = self._group_by_shard((i, self._key_of[i]) for i in ids)
        self._n_boxes -= sum(parallel_map(apply, groups, grain=1))
        for point_id in ids:
            del self._points[point_id]
            del self._key_of[point_id]
            del self._slot[point_id]

    # ------------------------------------------------------------------
    # Neighborhood queries
    # ------------------------------------------------------------------

    def neighborhood(self, p: Point) -> List[Point]:
        """Stored points other than p in the 3^k boxes around p's box."""
        out = []
        for key in neighborhood_keys(grid_key(p, self.side)):
            bucket = self._bucket(key)
            if bucket:
                out.extend(self._points[i] for i in bucket if i != p.id)
        return out

    def is_sparse(self, p: Point) -> bool:
        """True iff no other stored point lies in p's box neighborhood."""
        for key in neighborhood_keys(grid_key(p, self.side)):
            bucket = self._bucket(key)
            if bucket and (len(bucket) > 1 or bucket[0] != p.id):
                return False
        return True

    def nearest_in_neighborhood(self, p: Point) -> Optional[Tuple[Point, float]]:
        """Closest point of neighborhood(p), ties broken by smaller id."""
        best: Optional[Tuple[float, int, Point]] = None
        for q in self.neighborhood(p):
            cand = (distance(p, q), q.id, q)
            if best is None or cand[:2] < best[:2]:
                best = cand
        if best is None:
            return None
        return best[2], best[0]

    # ------------------------------------------------------------------
    # Box counters
    # ------------------------------------------------------------------

    def mark(self, ids: Iterable[int]) -> None:
        """Count, per box, how many of ids are stored there.

        Counters from earlier calls are discarded by bumping the epoch.
        """
        with self._count_lock:
            self._mark_locked(ids)

    def _mark_locked(self, ids: Iterable[int]) -> None:
        self._epoch += 1
        epoch = self._epoch
        unique = ids if isinstance(ids, (set, frozenset)) else set(ids)
        for point_id in unique:
            key = self._key_of.get(point_id)
            if key is None:
                continue
            stamp = self._stamps.get(key)
            count = stamp[1] if stamp is not None and stamp[0] == epoch else 0
            self._stamps[key] = (epoch, count + 1)

    def marked_count(self, key: GridKey) -> int:
        stamp = self._stamps.get(key)
        if stamp is None or stamp[0] != self._epoch:
            return 0
        return stamp[1]

    def surviving(self, key: GridKey) -> int:
        """Occupants of box key that were not counted by the last mark()."""
        return self.box_size(key) - self.marked_count(key)

    def box_only_contains(self, key: GridKey, ids: Iterable[int]) -> bool:
        """True iff every point in the box of key belongs to ids."""
        size = self.box_size(key)
        if size == 0:
            return True
        with self._count_lock:
            self._mark_locked(ids)
            return self.marked_count(key) == size

    def newly_sparse(self, deleted: Sequence[Point], ids: Set[int]) -> List[Point]:
        """Stored points outside ids whose box neighborhood lies entirely in ids.

        These are the points that become sparse once ids are deleted. Only a box
        next to a deleted point holding exactly one survivor can produce one.
        Call before deleting ids.
        """
        self.mark(ids)

        def around(x: Point) -> List[int]:
            found = []
            for key in neighborhood_keys(self._key_of[x.id]):
                if self.surviving(key) != 1:
                    continue
                r_id = next(i for i in self._bucket(key) if i not in ids)
                if all(self.surviving(nk) == (1 if nk == key else 0)
                       for nk in neighborhood_keys(key)):
                    found.append(r_id)
            return found

        found_ids = set()
        for chunk in parallel_map(around, deleted):
            found_ids.update(chunk)
        return [self._points[i] for i in sorted(found_ids)]
