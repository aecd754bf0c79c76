# ============================================================================
# tests/test_geometry.py
# ============================================================================
"""Tests for points, the metric and grid keys."""

import itertools
import math
from fractions import Fraction
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from src.geometry.point import (
    PairResult,
    Point,
    best_pair,
    check_points,
    distance,
    grid_key,
    keys_adjacent,
    neighborhood_keys,
)

coord = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def point_pairs(draw, k=None):
    k = k or draw(st.integers(min_value=1, max_value=4))
    a = draw(st.lists(coord, min_size=k, max_size=k))
    b = draw(st.lists(coord, min_size=k, max_size=k))
    return Point(0, tuple(a)), Point(1, tuple(b))


# ============================================================================
# distance
# ============================================================================

def test_distance_345():
    assert distance(Point(0, (0, 0)), Point(1, (3, 4))) == 5.0


def test_distance_identity():
    p = Point(0, (1.5, -2.0, 7.0))
    assert distance(p, p) == 0.0


def test_distance_matches_exact_reference():
    """Random pairs agree with an exact rational computation within 1e-12 relative."""
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b = rng.normal(size=(2, 3)) * 100
        exact = sum((Fraction(x) - Fraction(y)) ** 2 for x, y in zip(a, b))
        ref = math.sqrt(float(exact))
        got = distance(Point(0, tuple(a)), Point(1, tuple(b)))
        assert got == pytest.approx(ref, rel=1e-12)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError, match="Dimension mismatch"):
        distance(Point(0, (0, 0)), Point(1, (0, 0, 0)))


@given(point_pairs())
def test_distance_symmetric(pair):
    p, q = pair
    assert distance(p, q) == distance(q, p)


@given(st.integers(min_value=1, max_value=4).flatmap(
    lambda k: st.tuples(*[st.lists(coord, min_size=k, max_size=k) for _ in range(3)])))
def test_triangle_inequality(triple):
    a, b, c = (Point(i, tuple(x)) for i, x in enumerate(triple))
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


# ============================================================================
# Points and pairs
# ============================================================================

def test_point_rejects_negative_id():
    with pytest.raises(ValueError):
        Point(-1, (0.0,))


def test_pair_is_normalized():
    pair = PairResult.of(Point(9, (0, 0)), Point(2, (0, 1)))
    assert (pair.a, pair.b, pair.dist) == (2, 9, 1.0)


def test_pair_rejects_same_id():
    p = Point(3, (0, 0))
    with pytest.raises(ValueError):
        PairResult.of(p, p)


def test_best_pair_tie_rule():
    pairs = [PairResult(2, 5, 1.0), PairResult(1, 7, 1.0), None, PairResult(0, 1, 2.0)]
    assert best_pair(pairs) == PairResult(1, 7, 1.0)


def test_check_points_rejects_duplicates():
    with pytest.raises(ValueError, match="identical coordinates"):
        check_points([Point(0, (1, 1)), Point(1, (1, 1))])
    with pytest.raises(ValueError, match="Duplicate point id"):
        check_points([Point(0, (1, 1)), Point(0, (2, 1))])
    with pytest.raises(ValueError, match="dimension"):
        check_points([Point(0, (1, 1)), Point(1, (2, 1, 0))])


# ============================================================================
# Grid keys
# ============================================================================

def test_grid_key_floor():
    assert grid_key(Point(0, (2.5, 7.1)), 1.0) == (2, 7)
    assert grid_key(Point(0, (-0.5, 0.0)), 1.0) == (-1, 0)


def test_grid_key_side_for_level():
    # k = 2: side d / 12
    d = 6.0
    assert grid_key(Point(0, (1.0, 0.4)), d / 12) == (2, 0)


@pytest.mark.parametrize("side", [0.0, -1.0, math.inf, math.nan])
def test_grid_key_bad_side(side):
    with pytest.raises(ValueError):
        grid_key(Point(0, (1.0,)), side)


def test_grid_key_overflow():
    with pytest.raises(ValueError, match="overflows"):
        grid_key(Point(0, (1e300,)), 1e-300)


def test_neighborhood_keys_1d():
    assert neighborhood_keys((5,)) == [(4,), (5,), (6,)]


def test_neighborhood_keys_counts():
    assert len(neighborhood_keys((0, 0))) == 9
    keys = neighborhood_keys((1, -2, 3))
    expected = {(1 + a, -2 + b, 3 + c) for a, b, c in itertools.product((-1, 0, 1), repeat=3)}
    assert len(keys) == 27 and set(keys) == expected


@settings(max_examples=200)
@given(point_pairs(), st.floats(min_value=0.01, max_value=100.0))
def test_same_box_within_diagonal(pair, side):
    p, q = pair
    if grid_key(p, side) == grid_key(q, side):
        assert distance(p, q) <= side * math.sqrt(p.dim) + 1e-9


@settings(max_examples=200)
@given(point_pairs(), st.floats(min_value=0.01, max_value=100.0))
def test_close_points_are_adjacent(pair, side):
    p, q = pair
    if distance(p, q) <= side * (1 - 1e-9):
        assert grid_key(q, side) in neighborhood_keys(grid_key(p, side))
        assert keys_adjacent(grid_key(p, side), grid_key(q, side))
