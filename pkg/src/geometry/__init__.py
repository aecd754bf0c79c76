"""Geometry package - points, metric and grid keys."""

from .point import (
    Point,
    PairResult,
    GridKey,
    best_pair,
    distance,
    grid_key,
    cell_of,
    neighborhood_keys,
    keys_adjacent,
    check_points,
)

__all__ = [
    'Point',
    'PairResult',
    'GridKey',
    'best_pair',
    'distance',
    'grid_key',
    'cell_of',
    'neighborhood_keys',
    'keys_adjacent',
    'check_points',
]
