# ============================================================================
# src/partition/sparse_partition.py
# ============================================================================
"""Sparse partition: batch-dynamic closest pair."""

import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple
import numpy as np
from src.geometry.point import Point, PairResult, best_pair, check_points, distance
from src.grid.box_index import make_box_index
from src.heap.batch_heap import BatchHeap
from src.parallel import Forked, fork, join_all, parallel_map, parallel_min
from src.partition.heap_update import (
    build_level_heap,
    heap_update_naive,
    heap_update_pull,
    restricted_entry,
    restricted_entry_scan,
    star_entry,
    update_star,
)
from src.partition.level import Level, LevelDelta, RestrictedDistance, simplified_cutoff
from src.partition.validate import ValidationReport, validate as validate_partition
import config

MODES = ('theoretical', 'simplified')
PROTOCOLS = ('pull', 'naive')


def _largest_abs(points: Iterable[Point]) -> float:
    return max((abs(c) for p in points for c in p.coords), default=0.0)


class SparsePartition:
    """Levels (S_i, S_i', p_i, q_i, d_i) with grids and heaps.

    S_1 is the whole point set and S_{i+1} = S_i minus S_i'. Each level's grid
    has box side d_i / (6k), where d_i is the distance from a random pivot of
    S_i to its nearest neighbor in S_i; S_i' holds the points of S_i with no
    other point in their 3^k box neighborhood. The sparse sets partition the
    points, and the closest pair always lies within the last k + 1 levels.

    In theoretical mode every level keeps a heap of restricted distances. In
    simplified mode a single heap H* holds, for each point of S_j, its nearest
    neighbor within S_j, where j sits ceil(log3(2 sqrt(k))) levels above L.

    With fewer than 2 points the structure is idle: it stores the points and
    has no levels.
    """

    def __init__(
        self,
        dim: int,
        mode: Optional[str] = None,
        protocol: Optional[str] = None,
        seed: int = config.RANDOM_SEED,
        verbose: int = 0
    ):
        mode = mode if mode is not None else config.PARTITION_MODE
        protocol = protocol if protocol is not None else config.HEAP_UPDATE_PROTOCOL
        if mode not in MODES:
            raise ValueError(f"Unknown partition mode: {mode}")
        if protocol not in PROTOCOLS:
            raise ValueError(f"Unknown heap update protocol: {protocol}")
        if dim < 1:
            raise ValueError(f"Dimension must be >= 1, got {dim}")
        self.dim = dim
        self.mode = mode
        self.protocol = protocol
        self.seed = seed
        self.verbose = verbose
        self.rng = np.random.Generator(np.random.Philox(seed))

        self.levels: List[Level] = []
        self.points: Dict[int, Point] = {}
        self.level_of: Dict[int, int] = {}
        self._coords: Dict[Tuple[float, ...], int] = {}
        self._max_abs = 0.0
        self._max_abs_stale = False

        # Simplified mode
        self.j = 0
        self.star_grid = None
        self.star_heap: Optional[BatchHeap] = None

        # Per-batch scratch
        self.deltas: Dict[int, LevelDelta] = {}
        self.last_stats: Dict = {}

    @classmethod
    def build(
        cls,
        points: Sequence[Point],
        mode: Optional[str] = None,
        seed: int = config.RANDOM_SEED,
        protocol: Optional[str] = None,
        verbose: int = 0
    ) -> 'SparsePartition':
        """Build the structure over at least 2 distinct points."""
        if len(points) < 2:
            raise ValueError(f"Build needs at least 2 points, got {len(points)}")
        dim = check_points(points)
        sp = cls(dim, mode=mode, protocol=protocol, seed=seed, verbose=verbose)
        sp._ingest(points)
        sp._build_from(list(points), 1)
        sp._refresh_star(force=True)
        if not sp._keyable(sp.closest_pair().dist, sp._largest_coord()):
            raise ValueError("Coordinate range is too wide for the closest pair distance "
                             "(grid keys would overflow)")
        sp.last_stats = {'op': 'build', 'm': len(points), 'rebuild_level': 1,
                         'levels_before': 0, 'levels_after': sp.L}
        return sp

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def level(self, i: int) -> Level:
        """Level i (1-based)."""
        if not 1 <= i <= len(self.levels):
            raise ValueError(f"Level {i} out of range 1..{len(self.levels)}")
        return self.levels[i - 1]

    # ------------------------------------------------------------------
    # Ingestion
    # ------------------------------------------------------------------

    def _ingest(self, batch: Sequence[Point]) -> None:
        check_points(batch, self.dim)
        for p in batch:
            if p.id in self.points:
                raise ValueError(f"Point id {p.id} already stored")
            other = self._coords.get(p.coords)
            if other is not None:
                raise ValueError(f"Point {p.id} duplicates the coordinates of stored point {other}")
        for p in batch:
            self.points[p.id] = p
            self._coords[p.coords] = p.id
        self._max_abs = max(self._max_abs, _largest_abs(batch))

    def _forget(self, ids: Sequence[int]) -> None:
        for i in ids:
            p = self.points.pop(i)
            del self._coords[p.coords]
            self.level_of.pop(i, None)
            if _largest_abs([p]) >= self._max_abs:
                self._max_abs_stale = True

    def _largest_coord(self) -> float:
        """Largest |coordinate| over the stored points."""
        if self._max_abs_stale:
            self._max_abs = _largest_abs(self.points.values())
            self._max_abs_stale = False
        return self._max_abs

    def _keyable(self, delta: float, max_abs: float) -> bool:
        """True iff grids of side >= delta / (6k) can key coordinates up to max_abs.

        Every grid side is at least the closest pair distance over 6k. Half the
        key range is kept as margin for rounding in the side.
        """
        return max_abs * 6 * self.dim <= 0.5 * config.MAX_KEY_MAGNITUDE * delta

    def _reset_idle(self) -> None:
        self.levels = []
        self.level_of = {}
        self.j = 0
        self.star_grid = None
        self.star_heap = None

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def _pick(self, pool: Sequence[Point]) -> Point:
        ordered = sorted(pool, key=lambda p: p.id)
        return ordered[int(self.rng.integers(len(ordered)))]

    def _build_from(
        self,
        members: List[Point],
        start: int,
        pivot_pool: Optional[Sequence[Point]] = None,
        pivot: Optional[Point] = None
    ) -> None:
        """Rebuild levels start.. over members (the new S_start).

        Args:
            members: Points of S_start
            start: First level to rebuild (levels below stay untouched)
            pivot_pool: Draw the first pivot uniformly from these points
            pivot: Use this point as the first pivot
        """
        del self.levels[start - 1:]
        if self.verbose >= 2:
            print(f"  rebuild from level {start} over {len(members):,} points")

        heap_tasks: List[Tuple[Level, Forked]] = []
        current = members
        i = start
        try:
            while current:
                if len(current) < 2:
                    raise AssertionError(f"Level {i} would hold a single point {current[0].id}")
                if pivot is not None and i == start:
                    p = pivot
                elif pivot_pool and i == start:
                    p = self._pick(pivot_pool)
                else:
                    p = self._pick(current)

                nearest = parallel_min(lambda q: None if q.id == p.id else (distance(p, q), q.id), current)
                d, q_id = nearest
                side = d / (6 * self.dim)
                grid = make_box_index(current, side, self.dim)
                flags = parallel_map(grid.is_sparse, current)

                sparse = {x.id for x, f in zip(current, flags) if f}
                lv = Level(index=i, pivot=p.id, witness=q_id, d=d, side=side, grid=grid, sparse=sparse)
                for x_id in sparse:
                    self.level_of[x_id] = i
                self.levels.append(lv)
                if self.mode == 'theoretical':
                    lv.sparse_grid = make_box_index(lv.sparse_points(), d, self.dim)
                    # Heap i reads sparse grids of levels <= i only
                    heap_tasks.append((lv, fork(lambda i=i: build_level_heap(self, i))))

                current = [x for x, f in zip(current, flags) if not f]
                i += 1
        finally:
            heaps = join_all([task for _, task in heap_tasks])
        for (lv, _), heap in zip(heap_tasks, heaps):
            lv.heap = heap

    def _refresh_star(self, force: bool = False) -> bool:
        """Recompute j and rebuild H* when j moved (or when forced)."""
        if self.mode != 'simplified':
            return False
        if not self.levels:
            self.j = 0
            self.star_grid = None
            self.star_heap = None
            return True
        j = simplified_cutoff(self.L, self.dim)
        if not force and j == self.j and self.star_heap is not None:
            return False
        self.j = j
        lv = self.level(j)
        members = lv.members()
        self.star_grid = make_box_index(members, lv.d, self.dim)
        self.star_heap = BatchHeap.build(parallel_map(lambda x: star_entry(self, x), members))
        return True

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def closest_pair(self) -> PairResult:
        """Closest pair, ties broken by the smaller (a, b)."""
        if self.n < 2 or not self.levels:
            raise ValueError(f"closest_pair needs at least 2 points, structure holds {self.n}")
        if self.mode == 'simplified':
            heaps = [self.star_heap]
        else:
            heaps = [self.level(i).heap for i in range(max(1, self.L - self.dim), self.L + 1)]

        heaps = [h for h in heaps if h is not None and len(h) > 0]
        if not heaps:
            raise AssertionError("No heap entries in the last levels")
        key = min(h.find_min().key for h in heaps)
        if math.isinf(key):
            raise AssertionError("Closest pair not found within the last levels")
        pairs = []
        for h in heaps:
            if h.find_min().key == key:
                for e in h.min_ties():
                    pairs.append(PairResult.of(self.points[e.owner], self.points[e.witness], e.key))
        return best_pair(pairs)

    def restricted_distance(self, point_id: int, i: int) -> RestrictedDistance:
        """Restricted distance of a point of S_i' (value +inf and witness -1 if none).

        Raises:
            ValueError: If the point is not in S_i'
        """
        if self.level_of.get(point_id) != i:
            raise ValueError(f"Point {point_id} is not in the sparse set of level {i}")
        x = self.points[point_id]
        if self.mode == 'theoretical':
            entry = restricted_entry(self, x, i)
        else:
            entry = restricted_entry_scan(self, x, i)
        return RestrictedDistance(owner=point_id, witness=entry.witness, value=entry.key)

    # ------------------------------------------------------------------
    # Heap updates
    # ------------------------------------------------------------------

    def _heap_update(self, level_index: int) -> Optional[Forked]:
        """Theoretical-mode heap maintenance once level_index is final.

        pull: fork the pull of receptor level_index. naive: push synchronously.
        """
        if self.mode != 'theoretical':
            return None
        if self.protocol == 'naive':
            heap_update_naive(self, level_index)
            return None
        return fork(lambda: heap_update_pull(self, level_index))

    def _pull(self, receptor: int) -> Optional[Forked]:
        if self.mode != 'theoretical' or self.protocol != 'pull':
            return None
        return fork(lambda: heap_update_pull(self, receptor))

    def _check_packing(self, stats: Dict, key: str, m: int) -> None:
        bound = m * 3 ** self.dim
        if stats[key] > bound and config.ASSERT_PACKING_BOUNDS:
            raise AssertionError(f"|{key}| = {stats[key]} exceeds m * 3^k = {bound}")

    # ------------------------------------------------------------------
    # Batch insert
    # ------------------------------------------------------------------

    def batch_insert(self, batch: Sequence[Point]) -> None:
        """Insert a batch of new points.

        A batch whose coordinates cannot be keyed on every grid the result
        may need is rejected with ValueError and leaves the point set as it was.
        """
        levels_before = self.L
        stats = {'op': 'insert', 'm': len(batch), 'down_total': 0, 'down_union': 0,
                 'rebuild_level': None, 'levels_before': levels_before, 'pulls': 0}
        self.last_stats = stats
        if not batch:
            stats['levels_after'] = self.L
            return
        max_abs = max(self._largest_coord(), _largest_abs(batch))
        if self.levels and not self._keyable(self.closest_pair().dist, max_abs):
            raise ValueError(f"Batch coordinates up to {max_abs} overflow the grid key range "
                             f"at the current closest pair distance")
        self._ingest(batch)

        try:
            self._insert_levels(batch, stats)
        except ValueError:
            self._restore_without(batch)
            raise
        if self.levels and not self._keyable(self.closest_pair().dist, max_abs):
            self.batch_delete([p.id for p in batch])
            stats['levels_after'] = self.L
            self.last_stats = stats
            raise ValueError("Batch creates a closest pair too small for the coordinate range "
                             "(grid keys would overflow)")
        stats['levels_after'] = self.L

    def _restore_without(self, batch: Sequence[Point]) -> None:
        """Drop a half-inserted batch and rebuild over the points stored before it."""
        self._forget([p.id for p in batch])
        self.deltas = {}
        self._reset_idle()
        if self.n >= 2:
            self._build_from(list(self.points.values()), 1)
            self._refresh_star(force=True)

    def _insert_levels(self, batch: Sequence[Point], stats: Dict) -> None:
        if not self.levels:
            if self.n >= 2:
                self._build_from(list(self.points.values()), 1)
                self._refresh_star(force=True)
                stats['rebuild_level'] = 1
            return

        self.deltas = {}
        pulls: List[Forked] = []
        incoming_at: Dict[int, List[Point]] = {}
        down_seen: Set[int] = set()
        Q: List[Point] = list(batch)
        down: List[Point] = []
        rebuild: Optional[Tuple[int, List[Point], Optional[Sequence[Point]], Optional[Point]]] = None
        i = 1
        last = 0

        try:
            while Q or down:
                incoming = Q + down
                if i > self.L:
                    rebuild = (i, incoming, incoming, None)
                    break
                lv = self.level(i)
                total = len(incoming) + lv.size
                if self.rng.random() < len(incoming) / total:
                    rebuild = (i, lv.members() + incoming, incoming, None)
                    break
                pivot = self.points[lv.pivot]
                if any(distance(pivot, x) < lv.d for x in incoming):
                    rebuild = (i, lv.members() + incoming, None, pivot)
                    break

                # Grid insert
                incoming_at[i] = incoming
                lv.grid.insert_batch(incoming)
                flags = parallel_map(lv.grid.is_sparse, incoming)
                sparse_new = {x.id: x for x, f in zip(incoming, flags) if f}

                displaced: Dict[int, Point] = {}
                for hits in parallel_map(lv.grid.neighborhood, [x for x in incoming if x.id not in sparse_new]):
                    for y in hits:
                        if y.id in lv.sparse:
                            displaced[y.id] = y

                for y_id in displaced:
                    lv.sparse.discard(y_id)
                lv.sparse.update(sparse_new)
                for x_id in sparse_new:
                    self.level_of[x_id] = i
                if lv.sparse_grid is not None:
                    lv.sparse_grid.delete_batch(list(displaced))
                    lv.sparse_grid.insert_batch(list(sparse_new.values()))
                self.deltas[i] = LevelDelta(added=sparse_new, removed=displaced)

                stats['down_total'] += len(displaced)
                down_seen.update(displaced)
                Q = [x for x in Q if x.id not in sparse_new]
                down = [x for x in down if x.id not in sparse_new] + list(displaced.values())

                task = self._heap_update(i)
                if task is not None:
                    pulls.append(task)
                    stats['pulls'] += 1
                last = i
                i += 1

            if rebuild is None:
                # Receptors below the last touched level still read its changes
                for r in range(last + 1, min(last + self.dim, self.L) + 1):
                    task = self._pull(r)
                    if task is not None:
                        pulls.append(task)
                        stats['pulls'] += 1
        finally:
            join_all(pulls)

        stats['down_union'] = len(down_seen)
        self._check_packing(stats, 'down_union', len(batch))

        star_level_changed = False
        if rebuild is not None:
            start, members, pool, forced = rebuild
            if self.verbose >= 2:
                print(f"  insert: rebuilding from level {start}")
            self._build_from(members, start, pivot_pool=pool, pivot=forced)
            stats['rebuild_level'] = start
            star_level_changed = start <= self.j

        if self.mode == 'simplified':
            if not self._refresh_star(force=star_level_changed) and self.j in incoming_at:
                update_star(self, incoming_at[self.j], [])

        self.deltas = {}

    # ------------------------------------------------------------------
    # Batch delete
    # ------------------------------------------------------------------

    def batch_delete(self, ids: Sequence[int]) -> None:
        """Delete a batch of stored point ids."""
        levels_before = self.L
        stats = {'op': 'delete', 'm': len(ids), 'up_total': 0, 'up_union': 0,
                 'rebuild_level': None, 'levels_before': levels_before, 'pulls': 0}
        self.last_stats = stats
        seen: Set[int] = set()
        for i in ids:
            if i not in self.points:
                raise ValueError(f"Point id {i} not stored")
            if i in seen:
                raise ValueError(f"Point id {i} listed twice in delete batch")
            seen.add(i)
        if not ids:
            stats['levels_after'] = self.L
            return

        if self.n - len(ids) < 2:
            self._forget(ids)
            self._reset_idle()
            stats['levels_after'] = 0
            return

        # Q_i = deleted points still in S_i, accumulated from the deepest level
        by_level: Dict[int, List[Point]] = {}
        for i in ids:
            by_level.setdefault(self.level_of[i], []).append(self.points[i])
        Q: Dict[int, List[Point]] = {}
        acc: List[Point] = []
        for i in range(self.L, 0, -1):
            acc = acc + by_level.get(i, [])
            Q[i] = acc
        deleted = set(ids)

        self.deltas = {}
        pulls: List[Forked] = []
        marked: Set[int] = set()
        up_seen: Set[int] = set()
        up: List[Point] = []
        removed_from_j: List[Point] = []

        for i in range(self.L, 0, -1):
            lv = self.level(i)
            delta = LevelDelta()
            q_i = Q[i]

            # Movers from S_{i+1} become sparse here
            for r in up:
                lv.sparse.add(r.id)
                self.level_of[r.id] = i
                delta.added[r.id] = r
            if lv.sparse_grid is not None and up:
                lv.sparse_grid.insert_batch(up)

            # Next movers: judged against the level-(i-1) grid before its deletions
            if i > 1:
                q_prev = Q[i - 1]
                prev = self.level(i - 1)
                candidates = prev.grid.newly_sparse(q_prev, {x.id for x in q_prev})
                up_next = [r for r in candidates if r.id in lv.grid and r.id not in deleted]
            else:
                up_next = []

            if lv.pivot in deleted or lv.witness in deleted:
                marked.add(i)
            moving = {r.id for r in up_next}
            if lv.pivot in moving or lv.witness in moving:
                marked.add(i)

            gone_sparse = [x.id for x in q_i if x.id in lv.sparse] + [r.id for r in up_next]
            for x_id in gone_sparse:
                lv.sparse.discard(x_id)
                if x_id in delta.added:
                    del delta.added[x_id]
                else:
                    delta.removed[x_id] = self.points[x_id]
            if lv.sparse_grid is not None and gone_sparse:
                lv.sparse_grid.delete_batch(gone_sparse)
            lv.grid.delete_batch([x.id for x in q_i] + [r.id for r in up_next])
            self.deltas[i] = delta

            if self.mode == 'simplified' and i == self.j:
                removed_from_j = list(q_i) + list(up_next)

            stats['up_total'] += len(up_next)
            up_seen.update(moving)
            up = up_next

            task = self._pull(i + self.dim) if i + self.dim <= self.L else None
            if self.protocol == 'naive' and self.mode == 'theoretical':
                heap_update_naive(self, i)
            if task is not None:
                pulls.append(task)
                stats['pulls'] += 1

        for r in range(1, min(self.dim, self.L) + 1):
            task = self._pull(r)
            if task is not None:
                pulls.append(task)
                stats['pulls'] += 1
        join_all(pulls)

        self._forget(ids)
        stats['up_union'] = len(up_seen)
        self._check_packing(stats, 'up_union', len(ids))

        star_level_changed = False
        if marked:
            start = min(marked)
            if self.verbose >= 2:
                print(f"  delete: rebuilding from level {start}")
            self._build_from(self.level(start).members(), start)
            stats['rebuild_level'] = start
            star_level_changed = start <= self.j

        if self.mode == 'simplified':
            if not self._refresh_star(force=star_level_changed) and removed_from_j:
                update_star(self, [], removed_from_j)

        self.deltas = {}
        stats['levels_after'] = self.L

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Recompute every invariant from scratch and report violations."""
        return validate_partition(self)
