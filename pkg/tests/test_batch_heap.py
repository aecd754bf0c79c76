# ============================================================================
# tests/test_batch_heap.py
# ============================================================================
"""Tests for the batched binary heap and its asynchronous repair."""

import math
import numpy as np
import pytest
from src.heap.batch_heap import BatchHeap, HeapEntry, KeyUpdate, group_by_level, level_of
from src.parallel import config_overrides


def expected_drain(keys):
    return sorted((k, o) for o, k in keys.items())


def drained(heap):
    return [(e.key, e.owner) for e in heap.drain()]


def sound(heap):
    return heap.check_order() is None and heap.check_handles()


@pytest.fixture
def heap_100():
    rng = np.random.default_rng(3)
    keys = {i: float(x) for i, x in enumerate(rng.integers(0, 50, size=100))}
    return BatchHeap.build([HeapEntry(k, o) for o, k in keys.items()]), keys


# ============================================================================
# Slot helpers
# ============================================================================

def test_level_of():
    assert [level_of(s) for s in range(7)] == [0, 1, 1, 2, 2, 2, 2]


def test_group_by_level():
    assert group_by_level([]) == []
    assert group_by_level([5, 0, 2, 1]) == [[0], [2, 1], [5]]


# ============================================================================
# Build and queries
# ============================================================================

def test_empty_heap():
    heap = BatchHeap()
    assert len(heap) == 0 and heap.min_ties() == []
    with pytest.raises(IndexError):
        heap.find_min()


def test_build_orders_by_key_then_owner(heap_100):
    heap, keys = heap_100
    assert sound(heap)
    assert drained(heap) == expected_drain(keys)
    assert len(heap) == 0


def test_build_rejects_duplicate_owner():
    with pytest.raises(ValueError, match="Duplicate heap owner 1"):
        BatchHeap.build([HeapEntry(1.0, 1), HeapEntry(2.0, 1)])


def test_unknown_mode():
    with pytest.raises(ValueError, match="Unknown heapify mode"):
        BatchHeap(heapify_mode='lazy')


def test_min_ties_returns_every_minimum():
    entries = [HeapEntry(2.0, 0), HeapEntry(1.0, 4), HeapEntry(1.0, 2), HeapEntry(3.0, 1), HeapEntry(1.0, 9)]
    heap = BatchHeap.build(entries)
    assert heap.find_min() == HeapEntry(1.0, 2)
    assert sorted(e.owner for e in heap.min_ties()) == [2, 4, 9]


def test_infinite_keys_sort_last():
    heap = BatchHeap.build([HeapEntry(math.inf, 0), HeapEntry(5.0, 1), HeapEntry(math.inf, 2)])
    assert drained(heap) == [(5.0, 1), (math.inf, 0), (math.inf, 2)]


# ============================================================================
# heapify
# ============================================================================

def test_heapify_mixed_updates(heap_100):
    heap, keys = heap_100
    updates = [KeyUpdate(o, keys[o], keys[o] + (37.0 if o % 2 else -37.0)) for o in range(0, 100, 3)]
    heap.heapify(updates)
    keys.update((u.owner, u.new_key) for u in updates)
    assert sound(heap)
    assert drained(heap) == expected_drain(keys)


def test_heapify_keeps_witness_unless_given():
    heap = BatchHeap.build([HeapEntry(1.0, 0, witness=7), HeapEntry(2.0, 1, witness=8)])
    heap.heapify([KeyUpdate(0, 1.0, 3.0), KeyUpdate(1, 2.0, 0.5, witness=9)])
    assert heap.entry(0) == HeapEntry(3.0, 0, 7)
    assert heap.entry(1) == HeapEntry(0.5, 1, 9)
    assert heap.find_min().owner == 1


def test_heapify_rejects_bad_updates(heap_100):
    heap, keys = heap_100
    with pytest.raises(ValueError, match="Unknown heap owner"):
        heap.heapify([KeyUpdate(1000, 0.0, 1.0)])
    with pytest.raises(ValueError, match="updated twice"):
        heap.heapify([KeyUpdate(0, keys[0], 1.0), KeyUpdate(0, keys[0], 2.0)])
    with pytest.raises(ValueError, match="Stale update"):
        heap.heapify([KeyUpdate(0, keys[0] + 1.0, 1.0)])
    with pytest.raises(ValueError, match="NaN"):
        heap.heapify([KeyUpdate(0, keys[0], math.nan)])
    assert sound(heap)


def test_equal_key_update_is_noop(heap_100):
    heap, keys = heap_100
    before = heap.entries()
    heap.heapify([KeyUpdate(o, keys[o], keys[o]) for o in range(10)])
    assert heap.entries() == before


# ============================================================================
# batch_insert / batch_delete
# ============================================================================

def test_batch_insert_into_empty_heap():
    heap = BatchHeap()
    heap.batch_insert([HeapEntry(float(9 - i), i) for i in range(40)])
    assert heap.capacity >= 40 and sound(heap)
    assert heap.find_min() == HeapEntry(-30.0, 39)


def test_batch_insert_rejects_present_owner(heap_100):
    heap, _ = heap_100
    with pytest.raises(ValueError, match="already present"):
        heap.batch_insert([HeapEntry(1.0, 5)])
    with pytest.raises(ValueError, match="NaN"):
        heap.batch_insert([HeapEntry(math.nan, 500)])


def test_batch_delete_tail_and_holes(heap_100):
    heap, keys = heap_100
    tail = [heap.slot_owner(s) for s in range(95, 100)]
    gone = tail[:3] + [heap.slot_owner(0), heap.slot_owner(1)]
    heap.batch_delete(gone)
    for o in gone:
        del keys[o]
    assert sound(heap)
    assert drained(heap) == expected_drain(keys)


def test_batch_delete_errors(heap_100):
    heap, _ = heap_100
    with pytest.raises(ValueError, match="Unknown heap owner"):
        heap.batch_delete([1000])
    with pytest.raises(ValueError, match="listed twice"):
        heap.batch_delete([3, 3])


def test_delete_everything_shrinks(heap_100):
    heap, keys = heap_100
    heap.batch_delete(list(keys))
    assert len(heap) == 0 and heap.handles == {}
    assert heap.capacity == 16


def test_delete_min():
    heap = BatchHeap.build([HeapEntry(3.0, 0), HeapEntry(1.0, 1), HeapEntry(2.0, 2)])
    assert heap.delete_min() == HeapEntry(1.0, 1)
    assert heap.find_min() == HeapEntry(2.0, 2)


# ============================================================================
# Random batches, sync vs async
# ============================================================================

def random_batches(heaps, seed, n_ops=120):
    rng = np.random.default_rng(seed)
    keys = {}
    next_id = 0
    for _ in range(n_ops):
        op = rng.integers(3)
        if op == 0 or not keys:
            m = int(rng.integers(1, 40))
            entries = [HeapEntry(float(rng.integers(0, 200)), next_id + i) for i in range(m)]
            next_id += m
            for h in heaps:
                h.batch_insert(entries)
            keys.update((e.owner, e.key) for e in entries)
        else:
            owners = list(keys)
            picks = rng.choice(len(owners), size=min(len(owners), int(rng.integers(1, 40))), replace=False)
            chosen = [owners[i] for i in picks]
            if op == 1:
                for h in heaps:
                    h.batch_delete(chosen)
                for o in chosen:
                    del keys[o]
            else:
                updates = [KeyUpdate(o, keys[o], float(rng.integers(0, 200))) for o in chosen]
                for h in heaps:
                    h.heapify(updates)
                keys.update((u.owner, u.new_key) for u in updates)
        for h in heaps:
            assert sound(h), h.heapify_mode
    return keys


@pytest.mark.parametrize("seed", range(5))
def test_sync_and_async_agree(seed, workers):
    heaps = [BatchHeap(heapify_mode='sync'), BatchHeap(heapify_mode='async')]
    keys = random_batches(heaps, seed)
    assert drained(heaps[0]) == drained(heaps[1]) == expected_drain(keys)


def test_async_heapify_restores_mode(heap_100):
    heap, keys = heap_100
    with config_overrides(N_WORKERS=4):
        heap.async_heapify([KeyUpdate(o, keys[o], -float(o)) for o in range(50)])
    assert heap.heapify_mode == 'sync' and sound(heap)
    assert heap.find_min().owner == 49


def test_swaps_within_batch_bound():
    rng = np.random.default_rng(17)
    n, m = 20000, 200
    heap = BatchHeap.build([HeapEntry(float(x), i) for i, x in enumerate(rng.random(n))])
    picks = rng.choice(n, size=m, replace=False)
    heap.swaps = 0
    heap.heapify([KeyUpdate(int(i), heap.entry(int(i)).key, float(rng.random())) for i in picks])
    assert heap.swaps <= 4 * m * (math.log2((n + m) / m) + 2)
    assert sound(heap)
