# ============================================================================
# src/geometry/point.py
# ============================================================================
"""Points, the Euclidean metric and grid-key arithmetic."""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple
import config

GridKey = Tuple[int, ...]


@dataclass(frozen=True)
class Point:
    """A k-dimensional point with a stable integer identity.

    Attributes:
        id: Unique non-negative integer within one data set
        coords: Coordinates as a tuple of floats
    """
    id: int
    coords: Tuple[float, ...]

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"Point id must be non-negative, got {self.id}")
        object.__setattr__(self, 'coords', tuple(float(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class PairResult:
    """A pair of point ids with their distance, normalized so a < b.

    Attributes:
        a: Smaller point id
        b: Larger point id
        dist: distance(a, b)
    """
    a: int
    b: int
    dist: float

    @classmethod
    def of(cls, p: Point, q: Point, dist: Optional[float] = None) -> 'PairResult':
        """Build a normalized pair, computing the distance unless given."""
        if p.id == q.id:
            raise ValueError(f"A pair needs two distinct points, got id {p.id} twice")
        if dist is None:
            dist = distance(p, q)
        a, b = (p.id, q.id) if p.id < q.id else (q.id, p.id)
        return cls(a, b, dist)

    @property
    def sort_key(self) -> Tuple[float, int, int]:
        """(dist, a, b): the global tie rule."""
        return (self.dist, self.a, self.b)


def best_pair(pairs: Iterable[Optional[PairResult]]) -> Optional[PairResult]:
    """Smallest pair under the (dist, a, b) rule, ignoring None entries."""
    best = None
    for pair in pairs:
        if pair is not None and (best is None or pair.sort_key < best.sort_key):
            best = pair
    return best


def distance(p: Point, q: Point) -> float:
    """Euclidean distance between two points of equal dimension."""
    if len(p.coords) != len(q.coords):
        raise ValueError(
            f"Dimension mismatch: point {p.id} has {len(p.coords)} coords, "
            f"point {q.id} has {len(q.coords)}"
        )
    return math.dist(p.coords, q.coords)


def _check_side(side: float) -> None:
    if not math.isfinite(side) or side <= 0:
        raise ValueError(f"Grid side must be positive and finite, got {side}")


def cell_of(coords: Sequence[float], side: float) -> GridKey:
    """Grid key of raw coordinates (see grid_key)."""
    _check_side(side)
    limit = config.MAX_KEY_MAGNITUDE
    cell = []
    for c in coords:
        v = c / side
        if not math.isfinite(v) or abs(v) > limit:
            raise ValueError(f"Coordinate {c} at side {side} overflows the grid key range")
        cell.append(math.floor(v))
    return tuple(cell)


def grid_key(p: Point, side: float) -> GridKey:
    """Box of p on the grid of the given side, origin at 0.

    Args:
        p: Point to locate
        side: Box side length (> 0)

    Returns:
        Tuple of floor(coords[j] / side)
    """
    return cell_of(p.coords, side)


@lru_cache(maxsize=None)
def _offsets(k: int) -> Tuple[GridKey, ...]:
    return tuple(itertools.product((-1, 0, 1), repeat=k))


def neighborhood_keys(key: GridKey) -> List[GridKey]:
    """The 3^k keys around and including key, in lexicographic offset order."""
    return [tuple(c + o for c, o in zip(key, off)) for off in _offsets(len(key))]


def keys_adjacent(a: GridKey, b: GridKey) -> bool:
    """True if the boxes differ by at most 1 in every coordinate."""
    return all(abs(x - y) <= 1 for x, y in zip(a, b))


def check_points(points: Sequence[Point], dim: Optional[int] = None) -> int:
    """Validate a batch at ingestion and return its dimension.

    Rejects duplicate ids, ragged dimensions and duplicate coordinates.
    """
    if dim is None and points:
        dim = points[0].dim
    seen_ids = set()
    seen_coords = {}
    for p in points:
        if p.dim != dim:
            raise ValueError(f"Point {p.id} has dimension {p.dim}, expected {dim}")
        if p.id in seen_ids:
            raise ValueError(f"Duplicate point id {p.id}")
        seen_ids.add(p.id)
        other = seen_coords.setdefault(p.coords, p.id)
        if other != p.id:
            raise ValueError(f"Points {other} and {p.id} have identical coordinates {p.coords}")
    return dim if dim is not None else 0
