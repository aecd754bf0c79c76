# ============================================================================
# src/partition/level.py
# ============================================================================
"""One level of the sparse partition and per-batch scratch records."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set
from src.geometry.point import Point
from src.grid.grid_dict import GridDict
from src.heap.batch_heap import BatchHeap


@dataclass
class Level:
    """Level i of the sparse partition.

    Attributes:
        index: Level number (1-based)
        pivot: Pivot point id p_i, drawn uniformly from S_i
        witness: Nearest point q_i to the pivot within S_i
        d: distance(p_i, q_i)
        side: Grid box side d / (6k)
        grid: S_i bucketed at `side`
        sparse: Ids of S_i', the points of S_i with an empty box neighborhood
        sparse_grid: S_i' bucketed at side d (restricted-distance lookups)
        heap: Restricted distances of S_i' (theoretical mode)
    """
    index: int
    pivot: int
    witness: int
    d: float
    side: float
    grid: GridDict
    sparse: Set[int] = field(default_factory=set)
    sparse_grid: Optional[GridDict] = None
    heap: Optional[BatchHeap] = None

    @property
    def size(self) -> int:
        return len(self.grid)

    def members(self) -> List[Point]:
        return self.grid.points()

    def sparse_points(self) -> List[Point]:
        return [self.grid.point(i) for i in self.sparse]


@dataclass
class LevelDelta:
    """Net change of one level's sparse set during a batch.

    Attributes:
        added: Points that entered S_i'
        removed: Points that left S_i'
    """
    added: Dict[int, Point] = field(default_factory=dict)
    removed: Dict[int, Point] = field(default_factory=dict)

    def changed(self) -> List[Point]:
        return list(self.added.values()) + list(self.removed.values())

    def __bool__(self) -> bool:
        return bool(self.added) or bool(self.removed)


def simplified_cutoff(n_levels: int, dim: int) -> int:
    """Level j = L - ceil(log3(2 sqrt(k))), clamped at 1."""
    return max(1, n_levels - math.ceil(math.log(2.0 * math.sqrt(dim), 3)))


@dataclass(frozen=True)
class RestrictedDistance:
    """Restricted distance of a sparse point.

    Attributes:
        owner: Point of S_i'
        witness: Nearest point found, or -1 when value is infinite
        value: Distance to the witness
    """
    owner: int
    witness: int
    value: float
