# ============================================================================
# src/static/base.py
# ============================================================================
"""Shared parameters and helpers for the static closest-pair algorithms."""

from dataclasses import dataclass
from typing import List, Optional, Sequence
import numpy as np
from src.geometry.point import PairResult, Point, best_pair, check_points
import config


@dataclass(frozen=True)
class StaticConfig:
    """Parameters of the static algorithms.

    Attributes:
        sample_exponent: Rabin samples ceil(n ** sample_exponent) points (0 < c < 1)
        cutoff: Inputs of at most this many points go to brute force (>= 2)
        seed: Seed for every randomized choice
    """
    sample_exponent: float = config.SAMPLE_EXPONENT
    cutoff: int = config.BASE_CASE_CUTOFF
    seed: int = config.RANDOM_SEED

    def __post_init__(self):
        if not 0 < self.sample_exponent < 1:
            raise ValueError(f"Sample exponent must lie in (0, 1), got {self.sample_exponent}")
        if self.cutoff < 2:
            raise ValueError(f"Base-case cutoff must be >= 2, got {self.cutoff}")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))


def require_points(points: Sequence[Point]) -> int:
    """Check a static input and return its dimension."""
    if len(points) < 2:
        raise ValueError(f"Closest pair needs at least 2 points, got {len(points)}")
    return check_points(points)


def scan_pairs(points: Sequence[Point]) -> Optional[PairResult]:
    """Quadratic scan used as the recursion base case."""
    return best_pair(
        PairResult.of(points[i], points[j])
        for i in range(len(points))
        for j in range(i + 1, len(points))
    )


def nearest_pairs(grid, points: Sequence[Point]) -> List[Optional[PairResult]]:
    """For each point, the pair with its nearest neighbor in the grid (None if isolated)."""
    out = []
    for p in points:
        hit = grid.nearest_in_neighborhood(p)
        out.append(None if hit is None else PairResult.of(p, hit[0], hit[1]))
    return out
