# ============================================================================
# tests/test_sparse_partition.py
# ============================================================================
"""Tests for the batch-dynamic sparse partition."""

import math
import numpy as np
import pytest
from src.bench.datasets import generate
from src.geometry.point import Point
from src.parallel import config_overrides
from src.partition import RestrictedDistance, SparsePartition, restricted_entry_scan, simplified_cutoff
from tests.conftest import brute_pair, make_points


def as_tuple(pair):
    return (pair.dist, pair.a, pair.b)


def square(ids=(5, 3, 8, 1)):
    coords = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    return [Point(i, c) for i, c in zip(ids, coords)]


def mixed_batches(sp, live, pool, rng, n_batches, max_batch, check_each=True):
    """Random inserts and deletes; oracle and validate() after every batch."""
    for b in range(n_batches):
        size = int(rng.integers(1, max_batch + 1))
        if rng.random() < 0.5 and pool:
            batch = [pool.pop() for _ in range(min(size, len(pool)))]
            sp.batch_insert(batch)
            live.update((p.id, p) for p in batch)
        else:
            ids = sorted(live)
            picks = rng.choice(len(ids), size=min(size, len(ids) - 2), replace=False)
            gone = [ids[i] for i in picks]
            sp.batch_delete(gone)
            for i in gone:
                pool.append(live.pop(i))
        if check_each:
            assert as_tuple(sp.closest_pair()) == brute_pair(list(live.values())), f"batch {b}"
            report = sp.validate()
            assert report.ok, f"batch {b}: {report}"


# ============================================================================
# Construction
# ============================================================================

@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_build_two_points(mode):
    sp = SparsePartition.build([Point(7, (0.0, 0.0)), Point(2, (3.0, 4.0))], mode=mode)
    assert sp.L == 1 and sp.n == 2
    assert as_tuple(sp.closest_pair()) == (5.0, 2, 7)
    assert sp.validate().ok


def test_build_needs_two_points():
    with pytest.raises(ValueError, match="at least 2 points"):
        SparsePartition.build([Point(0, (0.0, 0.0))])


def test_constructor_rejects_bad_options():
    with pytest.raises(ValueError, match="Unknown partition mode"):
        SparsePartition(2, mode='fast')
    with pytest.raises(ValueError, match="Unknown heap update protocol"):
        SparsePartition(2, protocol='push')
    with pytest.raises(ValueError, match="Dimension"):
        SparsePartition(0)


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_square_tie_picks_smallest_ids(mode):
    sp = SparsePartition.build(square(), mode=mode)
    assert as_tuple(sp.closest_pair()) == (1.0, 1, 3)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_build_matches_brute_force(k):
    pts = make_points(200, k, seed=k)
    sp = SparsePartition.build(pts)
    assert as_tuple(sp.closest_pair()) == brute_pair(pts)
    assert sp.validate().ok


def test_clustered_data_has_many_levels():
    ds = generate('varden', 400, 2, seed=4)
    sp = SparsePartition.build(ds.points)
    assert sp.L > 1
    assert as_tuple(sp.closest_pair()) == brute_pair(ds.points)
    report = sp.validate()
    assert report.ok, str(report)


def test_level_accessor_range(points_2d):
    sp = SparsePartition.build(points_2d)
    assert sp.level(1).index == 1
    with pytest.raises(ValueError, match="out of range"):
        sp.level(0)
    with pytest.raises(ValueError, match="out of range"):
        sp.level(sp.L + 1)


def test_level_count_is_logarithmic():
    pts = make_points(2000, 2, seed=6)
    sp = SparsePartition.build(pts, mode='simplified')
    assert sp.L <= 8 * math.log2(len(pts))


# ============================================================================
# Batch updates against brute force
# ============================================================================

@pytest.mark.parametrize("mode,protocol", [
    ('theoretical', 'pull'),
    ('theoretical', 'naive'),
    ('simplified', 'pull'),
])
@pytest.mark.parametrize("k", [2, 3])
def test_mixed_batches_match_brute_force(mode, protocol, k):
    pts = make_points(300, k, seed=10 + k)
    base, pool = pts[:120], list(reversed(pts[120:]))
    sp = SparsePartition.build(base, mode=mode, protocol=protocol, seed=k)
    rng = np.random.default_rng(k)
    mixed_batches(sp, {p.id: p for p in base}, pool, rng, n_batches=25, max_batch=30)


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_clustered_batches_match_brute_force(mode):
    pts = generate('varden', 300, 2, seed=21).points
    base, pool = pts[:100], list(reversed(pts[100:]))
    sp = SparsePartition.build(base, mode=mode, seed=21)
    mixed_batches(sp, {p.id: p for p in base}, pool, np.random.default_rng(21), n_batches=20, max_batch=40)


def test_parallel_workers_match_brute_force(workers):
    pts = make_points(250, 2, seed=30)
    base, pool = pts[:100], list(reversed(pts[100:]))
    sp = SparsePartition.build(base, seed=30)
    mixed_batches(sp, {p.id: p for p in base}, pool, np.random.default_rng(30), n_batches=12, max_batch=40)


def test_async_heapify_matches_brute_force():
    pts = make_points(200, 2, seed=31)
    with config_overrides(HEAPIFY_MODE='async', N_WORKERS=4, PARALLEL_GRAIN=4):
        sp = SparsePartition.build(pts[:80], seed=31)
        mixed_batches(sp, {p.id: p for p in pts[:80]}, list(reversed(pts[80:])),
                      np.random.default_rng(31), n_batches=10, max_batch=30)


def test_insert_from_empty_one_at_a_time():
    pts = make_points(60, 2, seed=40)
    sp = SparsePartition(2)
    for n, p in enumerate(pts, 1):
        sp.batch_insert([p])
        if n >= 2:
            assert as_tuple(sp.closest_pair()) == brute_pair(pts[:n])
    assert sp.validate().ok


def test_delete_down_to_two_points(points_3d):
    sp = SparsePartition.build(points_3d)
    live = list(points_3d)
    while len(live) > 2:
        gone, live = live[:7], live[7:]
        if len(live) < 2:
            live = gone[-2:] + live
            gone = gone[:-2]
        sp.batch_delete([p.id for p in gone])
        assert as_tuple(sp.closest_pair()) == brute_pair(live)
    assert sp.validate().ok


def test_modes_and_protocols_share_levels():
    pts = make_points(200, 2, seed=50)
    structures = [
        SparsePartition.build(pts[:100], mode='theoretical', protocol='pull', seed=5),
        SparsePartition.build(pts[:100], mode='theoretical', protocol='naive', seed=5),
        SparsePartition.build(pts[:100], mode='simplified', seed=5),
    ]
    for sp in structures:
        sp.batch_insert(pts[100:150])
        sp.batch_delete([p.id for p in pts[:40]])
    levels = [[(lv.pivot, lv.d, sorted(lv.sparse)) for lv in sp.levels] for sp in structures]
    assert levels[0] == levels[1] == levels[2]
    pull, naive = structures[0], structures[1]
    for i in range(1, pull.L + 1):
        assert sorted(pull.level(i).heap.entries()) == sorted(naive.level(i).heap.entries())


# ============================================================================
# Idle structure and input errors
# ============================================================================

def test_idle_after_deleting_to_one_point():
    sp = SparsePartition.build(square())
    sp.batch_delete([5, 3, 8])
    assert sp.n == 1 and sp.L == 0
    with pytest.raises(ValueError, match="at least 2 points"):
        sp.closest_pair()
    assert sp.validate().ok

    sp.batch_insert([Point(9, (0.5, 0.5))])
    assert sp.L >= 1
    assert as_tuple(sp.closest_pair()) == (math.dist((0.5, 0.5), (1.0, 1.0)), 1, 9)


def test_delete_everything():
    sp = SparsePartition.build(square())
    sp.batch_delete([1, 3, 5, 8])
    assert sp.n == 0 and sp.L == 0 and sp.level_of == {}


def level_snapshot(sp):
    return [(lv.pivot, lv.witness, lv.d, lv.side, frozenset(lv.sparse)) for lv in sp.levels]


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_empty_batches_are_noops(points_2d, mode):
    sp = SparsePartition.build(points_2d, mode=mode)
    before = level_snapshot(sp)
    pair = sp.closest_pair()
    sp.batch_insert([])
    assert sp.last_stats['m'] == 0
    assert level_snapshot(sp) == before
    sp.batch_delete([])
    assert level_snapshot(sp) == before
    assert sp.closest_pair() == pair
    assert sp.n == len(points_2d) and sp.validate().ok


def test_update_errors(points_2d):
    sp = SparsePartition.build(points_2d)
    with pytest.raises(ValueError, match="already stored"):
        sp.batch_insert([Point(points_2d[0].id, (1000.0, 1000.0))])
    with pytest.raises(ValueError, match="duplicates the coordinates"):
        sp.batch_insert([Point(10 ** 6, points_2d[0].coords)])
    with pytest.raises(ValueError, match="not stored"):
        sp.batch_delete([10 ** 6])
    with pytest.raises(ValueError, match="listed twice"):
        sp.batch_delete([points_2d[0].id, points_2d[0].id])
    assert sp.n == len(points_2d) and sp.validate().ok


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_insert_rejects_coordinates_past_the_key_range(mode):
    sp = SparsePartition.build([Point(0, (0.0, 0.0)), Point(1, (1e-15, 0.0))], mode=mode)
    with pytest.raises(ValueError, match="overflow"):
        sp.batch_insert([Point(2, (1e5, 0.0))])
    assert sp.n == 2 and 2 not in sp.points
    assert sp.validate().ok
    assert as_tuple(sp.closest_pair()) == (1e-15, 0, 1)

    sp.batch_insert([Point(3, (2e-15, 0.0))])
    assert sp.n == 3 and sp.validate().ok


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_insert_rejects_pair_too_close_for_the_key_range(mode, seed):
    far = [Point(0, (0.0, 0.0)), Point(1, (1e5, 0.0)), Point(2, (0.0, 1e5))]
    sp = SparsePartition.build(far, mode=mode, seed=seed)
    with pytest.raises(ValueError, match="overflow"):
        sp.batch_insert([Point(3, (1e-15, 0.0))])
    assert sp.n == 3 and 3 not in sp.points
    assert sp.validate().ok
    assert as_tuple(sp.closest_pair()) == (1e5, 0, 1)


def test_build_rejects_coordinate_range_past_the_key_range():
    with pytest.raises(ValueError, match="overflow"):
        SparsePartition.build([Point(0, (0.0,)), Point(1, (1e-15,)), Point(2, (1e5,))])


# ============================================================================
# Restricted distances, stats and audit
# ============================================================================

def test_restricted_distance_matches_scan():
    pts = generate('varden', 300, 2, seed=60).points
    sp = SparsePartition.build(pts, mode='theoretical')
    for x_id, i in list(sp.level_of.items())[:100]:
        want = restricted_entry_scan(sp, sp.points[x_id], i)
        got = sp.restricted_distance(x_id, i)
        assert got == RestrictedDistance(x_id, want.witness, want.key)


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_restricted_distance_matches_direct_minimum(mode):
    pts = generate('varden', 400, 2, seed=61).points
    sp = SparsePartition.build(pts, mode=mode, seed=61)
    within = 0
    for x_id, i in sp.level_of.items():
        x = sp.points[x_id]
        pool = [y for j in range(max(1, i - 2), i + 1) for y in sp.level(j).sparse_points() if y.id != x_id]
        direct = min(((math.dist(x.coords, y.coords), y.id) for y in pool), default=(math.inf, -1))
        got = sp.restricted_distance(x_id, i)
        if direct[0] <= sp.level(i).d:
            assert (got.value, got.witness) == direct
            within += 1
        else:
            assert got.value >= direct[0]
    assert within > 0


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_restricted_distance_of_isolated_point_is_infinite(mode, seed):
    pts = square() + [Point(99, (1000.0, 1000.0))]
    sp = SparsePartition.build(pts, mode=mode, seed=seed)
    assert sp.level_of[99] == 1
    assert sp.restricted_distance(99, 1) == RestrictedDistance(99, -1, math.inf)


def test_restricted_distance_requires_sparse_membership(points_2d):
    sp = SparsePartition.build(points_2d)
    x_id, i = next(iter(sp.level_of.items()))
    with pytest.raises(ValueError, match="not in the sparse set"):
        sp.restricted_distance(x_id, i + 1)


def test_packing_stats(points_2d):
    sp = SparsePartition.build(points_2d[:200])
    sp.batch_insert(points_2d[200:])
    stats = sp.last_stats
    assert stats['op'] == 'insert' and stats['m'] == 100
    assert stats['down_union'] <= stats['down_total']
    assert stats['down_union'] <= 100 * 3 ** 2
    assert stats['levels_after'] == sp.L

    sp.batch_delete([p.id for p in points_2d[:50]])
    stats = sp.last_stats
    assert stats['op'] == 'delete'
    assert stats['up_union'] <= 50 * 3 ** 2


def test_simplified_star_level_holds_pair():
    pts = generate('varden', 300, 3, seed=70).points
    sp = SparsePartition.build(pts[:150], mode='simplified', seed=70)
    sp.batch_insert(pts[150:])
    sp.batch_delete([p.id for p in pts[:60]])
    assert sp.j == simplified_cutoff(sp.L, 3)
    pair = sp.closest_pair()
    members = {p.id for p in sp.level(sp.j).members()}
    assert pair.a in members and pair.b in members


def test_simplified_cutoff():
    assert simplified_cutoff(1, 2) == 1
    assert simplified_cutoff(10, 1) == 9
    assert simplified_cutoff(10, 2) == 9
    assert simplified_cutoff(10, 9) == 8
    assert simplified_cutoff(10, 41) == 7


def test_validate_reports_corrupted_sparse_set(points_2d):
    sp = SparsePartition.build(points_2d)
    lv = sp.level(1)
    x_id = min(lv.sparse)
    lv.sparse.discard(x_id)
    report = sp.validate()
    assert not report.ok
    assert any(v.level == 1 and v.point == x_id for v in report.violations)
    assert "✗" in str(report)


def test_validate_reports_stale_heap_key(points_2d):
    sp = SparsePartition.build(points_2d, mode='theoretical')
    lv = sp.level(1)
    x_id = next(iter(lv.sparse))
    entry = lv.heap.entry(x_id)
    lv.heap._entries[lv.heap.handles[x_id]] = entry._replace(key=entry.key + 1.0)
    report = sp.validate()
    assert any(v.level == 1 and v.point == x_id and "heap key" in v.message for v in report.violations)
