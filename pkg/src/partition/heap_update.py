# ============================================================================
# src/partition/heap_update.py
# ============================================================================
"""Restricted distances and the per-level heap update protocols.

The heap of receptor level r keys every x in S_r' by its restricted distance:
the nearest point of S'_{r-k} .. S'_r (indices clamped at 1) whose box on the
grid of side d_r is adjacent to x's box. A change to S_j' can only alter keys
of owners whose side-d_r box is adjacent to the changed point, and those are
found by a neighborhood query on the receptor's side-d_r sparse grid.
"""

import math
from typing import TYPE_CHECKING, Dict, Iterable, List, Sequence, Tuple
from src.geometry.point import Point, cell_of, distance, keys_adjacent
from src.heap.batch_heap import BatchHeap, HeapEntry, KeyUpdate
from src.parallel import parallel_map

if TYPE_CHECKING:
    from src.partition.sparse_partition import SparsePartition


def window(sp: 'SparsePartition', receptor: int) -> range:
    """Initiator levels whose sparse sets feed the receptor's heap."""
    return range(max(1, receptor - sp.dim), receptor + 1)


def receptors(sp: 'SparsePartition', initiator: int) -> range:
    """Receptor levels whose heaps read the initiator's sparse set."""
    return range(initiator, min(initiator + sp.dim, sp.L) + 1)


def restricted_entry(sp: 'SparsePartition', x: Point, i: int) -> HeapEntry:
    """Heap entry of x in S_i' found by probing the window's sparse grids."""
    d_i = sp.level(i).d
    key = cell_of(x.coords, d_i)
    best: Tuple[float, int] = (math.inf, -1)
    for j in window(sp, i):
        # side d_j >= d_i, so the lookup covers every side-d_i neighbor
        for y in sp.level(j).sparse_grid.neighborhood(x):
            if keys_adjacent(cell_of(y.coords, d_i), key):
                cand = (distance(x, y), y.id)
                if cand < best:
                    best = cand
    return HeapEntry(best[0], x.id, best[1])


def restricted_entry_scan(sp: 'SparsePartition', x: Point, i: int) -> HeapEntry:
    """Same value as restricted_entry, by a linear scan over the window's sparse sets."""
    d_i = sp.level(i).d
    key = cell_of(x.coords, d_i)
    best: Tuple[float, int] = (math.inf, -1)
    for j in window(sp, i):
        for y in sp.level(j).sparse_points():
            if y.id != x.id and keys_adjacent(cell_of(y.coords, d_i), key):
                cand = (distance(x, y), y.id)
                if cand < best:
                    best = cand
    return HeapEntry(best[0], x.id, best[1])


def build_level_heap(sp: 'SparsePartition', i: int) -> BatchHeap:
    """Heap over S_i' keyed by restricted distance."""
    points = sp.level(i).sparse_points()
    entries = parallel_map(lambda x: restricted_entry(sp, x, i), points)
    return BatchHeap.build(entries)


def apply_changes(sp: 'SparsePartition', receptor: int, initiators: Iterable[int]) -> int:
    """Bring the receptor's heap up to date with the initiators' sparse-set changes.

    Args:
        sp: The sparse partition
        receptor: Level whose heap is updated
        initiators: Levels whose recorded deltas are taken into account

    Returns:
        Number of heap entries touched
    """
    lv = sp.level(receptor)
    heap = lv.heap
    deltas = sp.deltas
    own = deltas.get(receptor)
    initiators = list(initiators)

    doomed: List[int] = []
    fresh: List[Point] = []
    if own is not None and receptor in initiators:
        doomed = [i for i in own.removed if i in heap]
        fresh = [p for p in own.added.values() if p.id not in heap]
    fresh_ids = {p.id for p in fresh}

    candidates: Dict[int, Point] = {}
    for j in initiators:
        delta = deltas.get(j)
        if not delta:
            continue
        for y in delta.changed():
            for x in lv.sparse_grid.neighborhood(y):
                if x.id not in fresh_ids and x.id in heap:
                    candidates[x.id] = x
    for i in doomed:
        candidates.pop(i, None)

    if doomed:
        heap.batch_delete(doomed)
    if fresh:
        heap.batch_insert(parallel_map(lambda x: restricted_entry(sp, x, receptor), fresh))

    updates: List[KeyUpdate] = []
    stale = list(candidates.values())
    for x, entry in zip(stale, parallel_map(lambda x: restricted_entry(sp, x, receptor), stale)):
        old = heap.entry(x.id)
        if (old.key, old.witness) != (entry.key, entry.witness):
            updates.append(KeyUpdate(x.id, old.key, entry.key, entry.witness))
    if updates:
        heap.heapify(updates)
    return len(doomed) + len(fresh) + len(updates)


def heap_update_pull(sp: 'SparsePartition', receptor: int) -> int:
    """Receptor pulls the changes of every initiator in its window."""
    return apply_changes(sp, receptor, window(sp, receptor))


def heap_update_naive(sp: 'SparsePartition', initiator: int) -> int:
    """Initiator pushes its own changes to each receptor that reads it."""
    return sum(apply_changes(sp, r, [initiator]) for r in receptors(sp, initiator))


def star_entry(sp: 'SparsePartition', x: Point) -> HeapEntry:
    """H* entry: nearest other point of S_j in x's box neighborhood at side d_j."""
    hit = sp.star_grid.nearest_in_neighborhood(x)
    if hit is None:
        return HeapEntry(math.inf, x.id, -1)
    return HeapEntry(hit[1], x.id, hit[0].id)


def star_entry_scan(sp: 'SparsePartition', x: Point) -> HeapEntry:
    """H* entry by linear scan over S_j."""
    lv = sp.level(sp.j)
    key = cell_of(x.coords, lv.d)
    best: Tuple[float, int] = (math.inf, -1)
    for y in lv.members():
        if y.id != x.id and keys_adjacent(cell_of(y.coords, lv.d), key):
            cand = (distance(x, y), y.id)
            if cand < best:
                best = cand
    return HeapEntry(best[0], x.id, best[1])


def update_star(sp: 'SparsePartition', added: Sequence[Point], removed: Sequence[Point]) -> None:
    """Incrementally update the star grid and H* after S_j changed."""
    heap = sp.star_heap
    grid = sp.star_grid
    if removed:
        grid.delete_batch([p.id for p in removed])
        heap.batch_delete([p.id for p in removed])
    if added:
        grid.insert_batch(added)
    added_ids = {p.id for p in added}

    candidates: Dict[int, Point] = {}
    for y in list(added) + list(removed):
        for x in grid.neighborhood(y):
            if x.id not in added_ids:
                candidates[x.id] = x
    if added:
        heap.batch_insert(parallel_map(lambda x: star_entry(sp, x), added))

    updates: List[KeyUpdate] = []
    stale = list(candidates.values())
    for x, entry in zip(stale, parallel_map(lambda x: star_entry(sp, x), stale)):
        old = heap.entry(x.id)
        if (old.key, old.witness) != (entry.key, entry.witness):
            updates.append(KeyUpdate(x.id, old.key, entry.key, entry.witness))
    if updates:
        heap.heapify(updates)
