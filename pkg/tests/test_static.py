# ============================================================================
# tests/test_static.py
# ============================================================================
"""Tests for the static closest-pair algorithms."""

import math
import pytest
from hypothesis import given, settings, strategies as st
from src.bench.datasets import generate
from src.geometry.point import Point
from src.static import ALGORITHMS, StaticConfig, brute_force, divide_conquer, incremental, rabin, sieve
from tests.conftest import brute_pair, make_points

SMALL = StaticConfig(cutoff=4, seed=7)


def as_tuple(pair):
    return (pair.dist, pair.a, pair.b)


def lattice(side):
    """side x side integer lattice with scrambled ids: every nearest pair is at distance 1."""
    pts = [(float(x), float(y)) for x in range(side) for y in range(side)]
    ids = [(7 * i + 3) % len(pts) for i in range(len(pts))]
    return [Point(i, c) for i, c in zip(ids, pts)]


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
@pytest.mark.parametrize("k", [1, 2, 3, 5, 7])
def test_uniform_matches_brute_force(name, k):
    pts = make_points(300, k, seed=100 + k)
    assert as_tuple(ALGORITHMS[name](pts, SMALL)) == brute_pair(pts)


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
@pytest.mark.parametrize("k", [2, 3])
def test_varden_matches_brute_force(name, k):
    pts = generate('varden', 400, k, seed=k).points
    assert as_tuple(ALGORITHMS[name](pts, SMALL)) == brute_pair(pts)


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_lattice_ties_pick_smallest_ids(name):
    pts = lattice(12)
    assert as_tuple(ALGORITHMS[name](pts, SMALL)) == brute_pair(pts)


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_two_points(name):
    pts = [Point(4, (1.0, 1.0)), Point(2, (4.0, 5.0))]
    assert as_tuple(ALGORITHMS[name](pts)) == (5.0, 2, 4)


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_parallel_pool_agrees(name, workers):
    pts = make_points(400, 2, seed=55)
    assert as_tuple(ALGORITHMS[name](pts, SMALL)) == brute_pair(pts)


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_input_errors(name):
    fn = ALGORITHMS[name]
    with pytest.raises(ValueError, match="at least 2 points"):
        fn([Point(0, (0.0, 0.0))])
    with pytest.raises(ValueError, match="identical coordinates"):
        fn([Point(0, (1.0, 1.0)), Point(1, (1.0, 1.0))])
    with pytest.raises(ValueError, match="dimension"):
        fn([Point(0, (1.0, 1.0)), Point(1, (1.0, 2.0, 3.0))])


def test_pair_straddling_the_split_plane():
    # Halves are each far apart internally; the closest pair crosses x = 50
    left = [Point(i, (float(10 * i), 0.0)) for i in range(5)]
    right = [Point(5 + i, (50.0 + 10 * i, 0.0)) for i in range(6)]
    pts = left + right + [Point(12, (49.8, 5.0)), Point(13, (50.3, 5.1))]
    result = divide_conquer(pts, StaticConfig(cutoff=2))
    assert as_tuple(result) == brute_pair(pts)
    assert {result.a, result.b} == {12, 13}


def test_one_dimensional_slab():
    pts = [Point(i, (float(x),)) for i, x in enumerate([0, 9, 3, 20, 21.5, 40, 41])]
    assert as_tuple(divide_conquer(pts, StaticConfig(cutoff=2))) == (1.0, 5, 6)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-30, 30), st.integers(-30, 30)), min_size=2, max_size=60, unique=True))
def test_integer_points_agree(coords):
    pts = [Point(i, (float(x), float(y))) for i, (x, y) in enumerate(coords)]
    want = brute_pair(pts)
    for name, fn in ALGORITHMS.items():
        assert as_tuple(fn(pts, SMALL)) == want, name


# ============================================================================
# Configuration and statistics
# ============================================================================

@pytest.mark.parametrize("kwargs,msg", [
    ({'sample_exponent': 0.0}, "Sample exponent"),
    ({'sample_exponent': 1.0}, "Sample exponent"),
    ({'cutoff': 1}, "cutoff"),
])
def test_static_config_validation(kwargs, msg):
    with pytest.raises(ValueError, match=msg):
        StaticConfig(**kwargs)


def test_static_config_rng_is_reproducible():
    a, b = StaticConfig(seed=3).rng(), StaticConfig(seed=3).rng()
    assert a.integers(10 ** 9) == b.integers(10 ** 9)


def test_stats_are_reported():
    pts = make_points(500, 2, seed=60)
    stats = {}
    brute_force(pts, stats=stats)
    assert stats['candidates'] >= 1

    stats = {}
    divide_conquer(pts, StaticConfig(cutoff=16), stats)
    assert stats['leaves'] >= 500 // 16

    stats = {}
    result = rabin(pts, StaticConfig(cutoff=16), stats)
    assert stats['sample_size'] == math.ceil(500 ** 0.8)
    assert stats['sample_side'] >= result.dist

    stats = {}
    result = sieve(pts, stats=stats)
    assert stats['rounds'] >= 1 and stats['final_side'] >= result.dist

    stats = {}
    incremental(pts, stats=stats)
    assert stats['batches'] >= 1 and stats['rebuilds'] >= 1


def test_randomized_algorithms_ignore_seed_in_result():
    pts = make_points(300, 3, seed=61)
    results = {as_tuple(fn(pts, StaticConfig(seed=s))) for s in range(4) for fn in (rabin, sieve, incremental)}
    assert results == {brute_pair(pts)}
