# ============================================================================
# tests/conftest.py
# ============================================================================
"""Shared test fixtures and configuration."""

import math
import sys
from pathlib import Path
from typing import List
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest
from src.geometry.point import Point
from src.parallel import config_overrides


def make_points(n: int, k: int, seed: int = 0, scale: float = None, start_id: int = 0) -> List[Point]:
    """n distinct uniform points in [0, scale]^k (scale defaults to sqrt(n))."""
    rng = np.random.default_rng(seed)
    side = scale if scale is not None else math.sqrt(n)
    X = rng.uniform(0.0, side, size=(n, k))
    return [Point(start_id + i, tuple(row)) for i, row in enumerate(X.tolist())]


def brute_pair(points: List[Point]):
    """Independent double loop: (dist, a, b) of the closest pair."""
    best = None
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            d = math.dist(p.coords, q.coords)
            cand = (d, min(p.id, q.id), max(p.id, q.id))
            if best is None or cand < best:
                best = cand
    return best


@pytest.fixture(autouse=True)
def reset_random_seed():
    """Reset random seed before each test for reproducibility."""
    np.random.seed(42)


@pytest.fixture
def points_2d():
    """300 uniform points in the plane."""
    return make_points(300, 2, seed=1)


@pytest.fixture
def points_3d():
    """200 uniform points in 3-D."""
    return make_points(200, 3, seed=2)


@pytest.fixture
def points_5d():
    """150 uniform points in 5-D (k-d tree backed grids)."""
    return make_points(150, 5, seed=3)


@pytest.fixture(params=[1, 4], ids=['sequential', 'pool4'])
def workers(request):
    """Run the test once sequentially and once on a 4-worker pool with a tiny grain."""
    grain = 512 if request.param == 1 else 4
    with config_overrides(N_WORKERS=request.param, PARALLEL_GRAIN=grain):
        yield request.param
