"""Partition package - sparse partition levels, heap updates and audits."""

from .level import Level, LevelDelta, RestrictedDistance, simplified_cutoff
from .heap_update import restricted_entry, restricted_entry_scan, star_entry, star_entry_scan
from .validate import ValidationReport, Violation, validate
from .sparse_partition import SparsePartition, MODES, PROTOCOLS

__all__ = [
    'Level',
    'LevelDelta',
    'RestrictedDistance',
    'simplified_cutoff',
    'restricted_entry',
    'restricted_entry_scan',
    'star_entry',
    'star_entry_scan',
    'ValidationReport',
    'Violation',
    'validate',
    'SparsePartition',
    'MODES',
    'PROTOCOLS',
]
