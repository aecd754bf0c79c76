"""Heap package - batch-parallel binary heap."""

from .batch_heap import BatchHeap, HeapEntry, KeyUpdate, PLACEHOLDER, group_by_level, level_of
from .async_heapify import AtomicFlags, async_repair

__all__ = [
    'BatchHeap',
    'HeapEntry',
    'KeyUpdate',
    'PLACEHOLDER',
    'group_by_level',
    'level_of',
    'AtomicFlags',
    'async_repair',
]
