# ============================================================================
# src/heap/batch_heap.py
# ============================================================================
"""Array-backed binary min-heap with batched key updates."""

import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple
from src.parallel import parallel_map
import config

Rank = Tuple[float, float]

# Rank of a slot reserved by batch_insert before its key is known
PLACEHOLDER: Rank = (math.inf, math.inf)


class HeapEntry(NamedTuple):
    """Heap element: key plus (owner, witness) payload."""
    key: float
    owner: int
    witness: int = -1


@dataclass(frozen=True)
class KeyUpdate:
    """A key change for one owner.

    Attributes:
        owner: Owner id of the entry
        old_key: Key currently stored for owner
        new_key: Replacement key
        witness: Replacement witness (None keeps the stored one)
    """
    owner: int
    old_key: float
    new_key: float
    witness: Optional[int] = None


def level_of(slot: int) -> int:
    """Depth of a slot in the implicit tree (root is level 0)."""
    return (slot + 1).bit_length() - 1


def group_by_level(slots: Sequence[int]) -> List[List[int]]:
    """Counting sort of slots by level; index = level."""
    if not slots:
        return []
    levels = [level_of(s) for s in slots]
    buckets: List[List[int]] = [[] for _ in range(max(levels) + 1)]
    for s, lv in zip(slots, levels):
        buckets[lv].append(s)
    return buckets


class BatchHeap:
    """Binary min-heap ordered by (key, owner) with owner handles.

    Keys are changed in batches through heapify(): increases are sifted down
    level by level from the deepest, then decreases are sifted up level by
    level from the shallowest. batch_insert and batch_delete reduce to heapify.

    Attributes:
        swaps: Total sift swaps performed (work proxy)
        capacity: Allocated slot count (doubles on growth, halves at quarter load)
    """

    def __init__(self, heapify_mode: Optional[str] = None):
        mode = heapify_mode if heapify_mode is not None else config.HEAPIFY_MODE
        if mode not in ('sync', 'async'):
            raise ValueError(f"Unknown heapify mode: {mode}")
        self.heapify_mode = mode
        self.capacity = config.HEAP_MIN_CAPACITY
        self._entries: List[Optional[HeapEntry]] = [None] * self.capacity
        self._ranks: List[Optional[Rank]] = [None] * self.capacity
        self._size = 0
        self.handles: Dict[int, int] = {}
        self.swaps = 0

    @classmethod
    def build(cls, entries: Sequence[HeapEntry], heapify_mode: Optional[str] = None) -> 'BatchHeap':
        """Build a heap from entries with distinct owners (bottom-up, linear work)."""
        heap = cls(heapify_mode)
        seen = set()
        for e in entries:
            if e.owner in seen:
                raise ValueError(f"Duplicate heap owner {e.owner}")
            seen.add(e.owner)
        heap._grow(len(entries))
        for slot, e in enumerate(entries):
            heap._entries[slot] = e
            heap._ranks[slot] = (e.key, e.owner)
            heap.handles[e.owner] = slot
        heap._size = len(entries)
        for slot in range(heap._size // 2 - 1, -1, -1):
            heap.swaps += heap._sift_down(slot)
        return heap

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return self._size

    def __contains__(self, owner: int) -> bool:
        return owner in self.handles

    @property
    def size(self) -> int:
        return self._size

    def find_min(self) -> HeapEntry:
        """Entry with the smallest (key, owner)."""
        if self._size == 0:
            raise IndexError("find_min on an empty heap")
        return self._entries[0]

    def min_ties(self) -> List[HeapEntry]:
        """All entries whose key equals the minimum key."""
        if self._size == 0:
            return []
        key = self._entries[0].key
        out = []
        stack = [0]
        while stack:
            slot = stack.pop()
            if slot < self._size and self._entries[slot].key == key:
                out.append(self._entries[slot])
                stack.extend((2 * slot + 1, 2 * slot + 2))
        return out

    def entry(self, owner: int) -> HeapEntry:
        return self._entries[self.handles[owner]]

    def entries(self) -> List[HeapEntry]:
        return list(self._entries[:self._size])

    def slot_owner(self, slot: int) -> int:
        return self._entries[slot].owner

    def check_order(self) -> Optional[int]:
        """First slot whose parent ranks above it, or None if the heap is valid."""
        for slot in range(1, self._size):
            if self._ranks[(slot - 1) // 2] > self._ranks[slot]:
                return slot
        return None

    def check_handles(self) -> bool:
        if len(self.handles) != self._size:
            return False
        return all(self._entries[slot].owner == owner for owner, slot in self.handles.items())

    # ------------------------------------------------------------------
    # Slot primitives
    # ------------------------------------------------------------------

    def _grow(self, needed: int) -> None:
        if needed <= self.capacity:
            return
        capacity = self.capacity
        while capacity < needed:
            capacity *= 2
        extra = capacity - self.capacity
        self._entries.extend([None] * extra)
        self._ranks.extend([None] * extra)
        self.capacity = capacity

    def _shrink(self) -> None:
        capacity = self.capacity
        while capacity > config.HEAP_MIN_CAPACITY and self._size < capacity * config.HEAP_SHRINK_FRACTION:
            capacity //= 2
        if capacity < self.capacity:
            del self._entries[capacity:]
            del self._ranks[capacity:]
            self.capacity = capacity

    def _swap(self, a: int, b: int) -> None:
        ents, ranks = self._entries, self._ranks
        ents[a], ents[b] = ents[b], ents[a]
        ranks[a], ranks[b] = ranks[b], ranks[a]
        self.handles[ents[a].owner] = a
        self.handles[ents[b].owner] = b

    def _sift_down(self, slot: int) -> int:
        """Sift the element at slot down; returns the number of swaps."""
        ranks, n = self._ranks, self._size
        moves = 0
        while True:
            left = 2 * slot + 1
            if left >= n:
                return moves
            child = left
            if left + 1 < n and ranks[left + 1] < ranks[left]:
                child = left + 1
            if ranks[child] < ranks[slot]:
                self._swap(slot, child)
                slot = child
                moves += 1
            else:
                return moves

    def _sift_up(self, slot: int) -> int:
        ranks = self._ranks
        moves = 0
        while slot > 0:
            parent = (slot - 1) // 2
            if ranks[slot] < ranks[parent]:
                self._swap(slot, parent)
                slot = parent
                moves += 1
            else:
                return moves
        return moves

    # ------------------------------------------------------------------
    # Batched repair
    # ------------------------------------------------------------------

    def _repair(self, increases: List[Tuple[int, Rank]], decreases: List[Tuple[int, Rank]]) -> None:
        """Restore heap order after rank changes.

        Entries are already in place; the ranks array still holds the old ranks.
        increases / decreases are (owner, new_rank) lists with disjoint owners.
        """
        if self.heapify_mode == 'async':
            from src.heap.async_heapify import async_repair
            async_repair(self, increases, decreases)
            return

        # Down phase: S+ only, S- keep their old ranks until the up phase
        for owner, rank in increases:
            self._ranks[self.handles[owner]] = rank
        for group in reversed(group_by_level([self.handles[o] for o, _ in increases])):
            # Same-level subtrees are disjoint
            self.swaps += sum(parallel_map(self._sift_down, group))

        # Up phase: one decrease at a time, shallowest start level first
        by_slot = {self.handles[o]: rank for o, rank in decreases}
        for group in group_by_level(list(by_slot)):
            for slot in group:
                self._ranks[slot] = by_slot[slot]
                self.swaps += self._sift_up(slot)

    def _validate_updates(self, updates: Sequence[KeyUpdate]) -> None:
        seen = set()
        for u in updates:
            if u.owner not in self.handles:
                raise ValueError(f"Unknown heap owner {u.owner}")
            if u.owner in seen:
                raise ValueError(
                    f"Owner {u.owner} updated twice in one batch; coalesce to a single update"
                )
            seen.add(u.owner)
            stored = self._entries[self.handles[u.owner]].key
            if stored != u.old_key and not (math.isnan(stored) and math.isnan(u.old_key)):
                raise ValueError(
                    f"Stale update for owner {u.owner}: stored key {stored}, update says {u.old_key}"
                )
            if math.isnan(u.new_key):
                raise ValueError(f"Key for owner {u.owner} is NaN")

    def heapify(self, updates: Sequence[KeyUpdate]) -> None:
        """Apply a batch of key updates and restore heap order.

        Args:
            updates: KeyUpdates with distinct, stored owners and current old keys
        """
        self._validate_updates(updates)
        increases: List[Tuple[int, Rank]] = []
        decreases: List[Tuple[int, Rank]] = []
        for u in updates:
            slot = self.handles[u.owner]
            old = self._entries[slot]
            witness = old.witness if u.witness is None else u.witness
            self._entries[slot] = HeapEntry(u.new_key, u.owner, witness)
            if u.new_key > u.old_key:
                increases.append((u.owner, (u.new_key, u.owner)))
            elif u.new_key < u.old_key:
                decreases.append((u.owner, (u.new_key, u.owner)))
        self._repair(increases, decreases)

    def async_heapify(self, updates: Sequence[KeyUpdate]) -> None:
        """heapify() through the flag-coordinated worker protocol."""
        mode = self.heapify_mode
        self.heapify_mode = 'async'
        try:
            self.heapify(updates)
        finally:
            self.heapify_mode = mode

    def batch_insert(self, entries: Sequence[HeapEntry]) -> None:
        """Append entries as placeholders, then decrease them to their keys."""
        seen = set()
        for e in entries:
            if e.owner in self.handles or e.owner in seen:
                raise ValueError(f"Heap owner {e.owner} already present")
            if math.isnan(e.key):
                raise ValueError(f"Key for owner {e.owner} is NaN")
            seen.add(e.owner)
        if not entries:
            return
        self._grow(self._size + len(entries))
        for e in entries:
            slot = self._size
            self._entries[slot] = e
            self._ranks[slot] = PLACEHOLDER
            self.handles[e.owner] = slot
            self._size += 1
        self._repair([], [(e.owner, (e.key, e.owner)) for e in entries])

    def batch_delete(self, owners: Sequence[int]) -> None:
        """Delete owners by packing the last m slots into their holes."""
        doomed = set()
        for owner in owners:
            if owner not in self.handles:
                raise ValueError(f"Unknown heap owner {owner}")
            if owner in doomed:
                raise ValueError(f"Heap owner {owner} listed twice in delete batch")
            doomed.add(owner)
        if not owners:
            return

        new_size = self._size - len(owners)
        holes = sorted(self.handles[o] for o in owners if self.handles[o] < new_size)
        movers = [slot for slot in range(new_size, self._size)
                  if self._entries[slot].owner not in doomed]

        increases: List[Tuple[int, Rank]] = []
        decreases: List[Tuple[int, Rank]] = []
        for hole, src in zip(holes, movers):
            old_rank = self._ranks[hole]
            entry = self._entries[src]
            new_rank = self._ranks[src]
            # The slot keeps the deleted entry's rank until the repair phase
            self._entries[hole] = entry
            self._ranks[hole] = old_rank
            self.handles[entry.owner] = hole
            if new_rank > old_rank:
                increases.append((entry.owner, new_rank))
            else:
                decreases.append((entry.owner, new_rank))

        for owner in owners:
            del self.handles[owner]
        for slot in range(new_size, self._size):
            self._entries[slot] = None
            self._ranks[slot] = None
        self._size = new_size
        self._repair(increases, decreases)
        self._shrink()

    def delete_min(self) -> HeapEntry:
        """Remove and return the minimum entry."""
        top = self.find_min()
        self.batch_delete([top.owner])
        return top

    def drain(self) -> List[HeapEntry]:
        """Remove every entry, returning them in (key, owner) order."""
        out = []
        while self._size:
            out.append(self.delete_min())
        return out
