# ============================================================================
# src/partition/validate.py
# ============================================================================
"""Structural audit of a sparse partition against from-scratch recomputation."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Set
from src.geometry.point import distance, grid_key
from src.partition.heap_update import restricted_entry_scan, star_entry_scan
from src.partition.level import simplified_cutoff

if TYPE_CHECKING:
    from src.partition.sparse_partition import SparsePartition


@dataclass
class Violation:
    """One broken invariant.

    Attributes:
        level: Level index (0 for structure-wide checks)
        point: Offending point id, or None
        message: What is wrong
    """
    level: int
    point: Optional[int]
    message: str

    def __str__(self) -> str:
        where = f"level {self.level}" if self.level else "structure"
        if self.point is not None:
            where += f", point {self.point}"
        return f"[{where}] {self.message}"


@dataclass
class ValidationReport:
    """Outcome of validate(); empty violations means the structure is sound."""
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None

    def add(self, level: int, point: Optional[int], message: str) -> None:
        self.violations.append(Violation(level, point, message))

    def __str__(self) -> str:
        if self.ok:
            return "✓ sparse partition valid"
        lines = [f"✗ {len(self.violations)} violation(s)"]
        lines.extend(f"  {v}" for v in self.violations[:20])
        return "\n".join(lines)


def _check_level(sp: 'SparsePartition', i: int, report: ValidationReport) -> None:
    lv = sp.level(i)
    members = {p.id: p for p in lv.members()}

    if lv.index != i:
        report.add(i, None, f"index field is {lv.index}")
    if lv.pivot not in members:
        report.add(i, lv.pivot, "pivot not in S_i")
        return
    if lv.witness not in members or lv.witness == lv.pivot:
        report.add(i, lv.witness, "witness not another point of S_i")
        return

    pivot = members[lv.pivot]
    nearest = min(distance(pivot, q) for q in members.values() if q.id != pivot.id)
    if distance(pivot, members[lv.witness]) != lv.d:
        report.add(i, lv.witness, f"d = {lv.d} differs from distance(pivot, witness)")
    if nearest != lv.d:
        report.add(i, lv.pivot, f"d = {lv.d} but pivot's nearest neighbor is at {nearest}")
    if lv.side != lv.d / (6 * sp.dim):
        report.add(i, None, f"side {lv.side} != d / 6k")

    for p in members.values():
        if lv.grid.key_of(p.id) != grid_key(p, lv.side):
            report.add(i, p.id, "stored under the wrong grid key")

    for p in members.values():
        sparse_now = lv.grid.is_sparse(p)
        if sparse_now != (p.id in lv.sparse):
            state = "sparse" if sparse_now else "not sparse"
            report.add(i, p.id, f"point is {state} but sparse-set membership disagrees")
    for x_id in lv.sparse:
        if x_id not in members:
            report.add(i, x_id, "sparse id not in S_i")
        elif sp.level_of.get(x_id) != i:
            report.add(i, x_id, f"level_of is {sp.level_of.get(x_id)}")


def _check_heaps(sp: 'SparsePartition', i: int, report: ValidationReport) -> None:
    lv = sp.level(i)
    if lv.sparse_grid is None or lv.heap is None:
        report.add(i, None, "missing sparse grid or heap")
        return
    if set(lv.sparse_grid.ids()) != lv.sparse:
        report.add(i, None, "sparse grid ids differ from S_i'")
    if set(e.owner for e in lv.heap.entries()) != lv.sparse:
        report.add(i, None, "heap owners differ from S_i'")
        return
    bad = lv.heap.check_order()
    if bad is not None:
        report.add(i, lv.heap.slot_owner(bad), f"heap order broken at slot {bad}")
    if not lv.heap.check_handles():
        report.add(i, None, "heap handles out of sync")
    for x in lv.sparse_points():
        want = restricted_entry_scan(sp, x, i)
        got = lv.heap.entry(x.id)
        if (got.key, got.witness) != (want.key, want.witness):
            report.add(i, x.id, f"heap key ({got.key}, {got.witness}) != ({want.key}, {want.witness})")


def _check_star(sp: 'SparsePartition', report: ValidationReport) -> None:
    want_j = simplified_cutoff(sp.L, sp.dim)
    if sp.j != want_j:
        report.add(0, None, f"j = {sp.j}, expected {want_j}")
        return
    members = {p.id for p in sp.level(sp.j).members()}
    heap = sp.star_heap
    if heap is None or sp.star_grid is None:
        report.add(sp.j, None, "missing H*")
        return
    if set(sp.star_grid.ids()) != members:
        report.add(sp.j, None, "star grid ids differ from S_j")
    if set(e.owner for e in heap.entries()) != members:
        report.add(sp.j, None, "H* owners differ from S_j")
        return
    bad = heap.check_order()
    if bad is not None:
        report.add(sp.j, heap.slot_owner(bad), f"H* order broken at slot {bad}")
    for x in sp.level(sp.j).members():
        want = star_entry_scan(sp, x)
        got = heap.entry(x.id)
        if (got.key, got.witness) != (want.key, want.witness):
            report.add(sp.j, x.id, f"H* key ({got.key}, {got.witness}) != ({want.key}, {want.witness})")


def validate(sp: 'SparsePartition') -> ValidationReport:
    """Recompute every invariant of the structure from scratch.

    Checks pivots, witnesses and d_i; grid placement; exact sparse sets;
    S_{i+1} = S_i minus S_i'; that the sparse sets partition the points;
    d_{i+1} <= d_i / 3; and the heap contents of the active mode.
    """
    report = ValidationReport()
    if sp.n < 2:
        if sp.levels:
            report.add(0, None, f"{sp.n} point(s) stored but {sp.L} level(s) present")
        return report
    if not sp.levels:
        report.add(0, None, f"{sp.n} points stored but no levels")
        return report

    if {p.id for p in sp.level(1).members()} != set(sp.points):
        report.add(1, None, "S_1 differs from the stored point set")

    for i in range(1, sp.L + 1):
        _check_level(sp, i, report)

    seen: Set[int] = set()
    for i in range(1, sp.L + 1):
        lv = sp.level(i)
        overlap = seen & lv.sparse
        if overlap:
            report.add(i, min(overlap), "point in two sparse sets")
        seen |= lv.sparse
        members = {p.id for p in lv.members()}
        if i < sp.L:
            nxt = sp.level(i + 1)
            if {p.id for p in nxt.members()} != members - lv.sparse:
                report.add(i + 1, None, "S_i+1 differs from S_i minus S_i'")
            if nxt.d > lv.d / 3:
                report.add(i + 1, None, f"d = {nxt.d} exceeds a third of the previous {lv.d}")
        elif lv.sparse != members:
            report.add(i, None, "last level has non-sparse points")
    if seen != set(sp.points):
        report.add(0, None, "sparse sets do not cover the point set")
    for x_id, i in sp.level_of.items():
        if x_id not in sp.points:
            report.add(i, x_id, "level_of holds a deleted point")

    if sp.mode == 'theoretical':
        for i in range(1, sp.L + 1):
            _check_heaps(sp, i, report)
    else:
        _check_star(sp, report)
    return report
