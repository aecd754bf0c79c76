# ============================================================================
# src/heap/async_heapify.py
# ============================================================================
"""Flag-coordinated asynchronous heap repair.

Down phase: every increased slot is a task. A task sifts down only after all
increased slots below it have finished; the last one to finish enqueues its
nearest increased ancestor. Running tasks therefore own disjoint subtrees.

Up phase: every decreased element is active. A step locks the parent slot and
the element's slot, and swaps only with an inactive parent. If the parent is
active, the thread sets the parent's wait-flag, registers itself there and
quits; whoever later moves or settles the parent re-enqueues the waiters.
"""

import queue
import threading
from typing import Callable, Dict, List, Sequence, Tuple, TYPE_CHECKING
from src.parallel import num_workers

if TYPE_CHECKING:
    from src.heap.batch_heap import BatchHeap, Rank

IDLE = 0
PENDING = 1
RUNNING = 2


class AtomicFlags:
    """Per-slot small-integer flags with compare-and-swap over striped locks."""

    def __init__(self, n: int, stripes: int = 64):
        self._flags = [IDLE] * n
        self._wait = [0] * n
        self._locks = [threading.Lock() for _ in range(stripes)]

    def lock_for(self, slot: int) -> threading.Lock:
        return self._locks[slot % len(self._locks)]

    def locks_for(self, *slots: int) -> List[threading.Lock]:
        """Distinct stripe locks for slots, in a global acquisition order."""
        stripes = sorted({s % len(self._locks) for s in slots})
        return [self._locks[i] for i in stripes]

    def get(self, slot: int) -> int:
        return self._flags[slot]

    def set(self, slot: int, value: int) -> None:
        self._flags[slot] = value

    def compare_and_swap(self, slot: int, expected: int, new: int) -> bool:
        with self.lock_for(slot):
            if self._flags[slot] != expected:
                return False
            self._flags[slot] = new
            return True

    def wait_flag(self, slot: int) -> int:
        return self._wait[slot]

    def set_wait_flag(self, slot: int, value: int) -> None:
        self._wait[slot] = value

    def all_clear(self) -> bool:
        return not any(self._flags) and not any(self._wait)


def _run_workers(initial: Sequence[int], work: Callable[[int], List[int]]) -> None:
    """Process items with a pool of threads; work returns follow-up items."""
    n_threads = num_workers()
    if n_threads <= 1:
        pending = list(initial)
        while pending:
            pending.extend(work(pending.pop()))
        return

    tasks: queue.Queue = queue.Queue()
    errors: List[BaseException] = []

    def worker():
        while True:
            item = tasks.get()
            try:
                if item is None:
                    return
                if not errors:
                    for follow_up in work(item):
                        tasks.put(follow_up)
            except BaseException as exc:  # re-raised in the caller
                errors.append(exc)
            finally:
                tasks.task_done()

    for item in initial:
        tasks.put(item)
    threads = [threading.Thread(target=worker, daemon=True) for _ in range(n_threads)]
    for t in threads:
        t.start()
    tasks.join()
    for _ in threads:
        tasks.put(None)
    for t in threads:
        t.join()
    if errors:
        raise errors[0]


def _down_phase(heap: 'BatchHeap', slots: List[int], counter: List[int], counter_lock: threading.Lock) -> None:
    if not slots:
        return
    increased = set(slots)
    nearest: Dict[int, int] = {}
    remaining: Dict[int, int] = {s: 0 for s in slots}
    for s in slots:
        a = s
        anc = -1
        while a > 0:
            a = (a - 1) // 2
            if a in increased:
                anc = a
                break
        nearest[s] = anc
        if anc >= 0:
            remaining[anc] += 1

    flags = AtomicFlags(heap.size)
    for s in slots:
        flags.set(s, PENDING)

    def work(slot: int) -> List[int]:
        if not flags.compare_and_swap(slot, PENDING, RUNNING):
            return []
        moves = heap._sift_down(slot)
        flags.set(slot, IDLE)
        anc = nearest[slot]
        with counter_lock:
            counter[0] += moves
            if anc < 0:
                return []
            remaining[anc] -= 1
            return [anc] if remaining[anc] == 0 else []

    _run_workers([s for s in slots if remaining[s] == 0], work)


def _up_phase(heap: 'BatchHeap', decreases: List[Tuple[int, 'Rank']], counter: List[int], counter_lock: threading.Lock) -> None:
    if not decreases:
        return
    flags = AtomicFlags(heap.size)
    waiters: Dict[int, List[int]] = {}
    for owner, rank in decreases:
        slot = heap.handles[owner]
        heap._ranks[slot] = rank
        flags.set(slot, PENDING)

    def release(slot: int) -> List[int]:
        # Caller holds the lock of slot
        flags.set_wait_flag(slot, 0)
        return waiters.pop(slot, [])

    def work(owner: int) -> List[int]:
        slot = heap.handles[owner]
        if not flags.compare_and_swap(slot, PENDING, RUNNING):
            return []
        moves = 0
        follow_up: List[int] = []
        while True:
            slot = heap.handles[owner]
            if slot == 0:
                with flags.lock_for(0):
                    flags.set(0, IDLE)
                    follow_up.extend(release(0))
                break
            parent = (slot - 1) // 2
            locks = flags.locks_for(parent, slot)
            for lock in locks:
                lock.acquire()
            try:
                if flags.get(parent) != IDLE:
                    flags.set_wait_flag(parent, 1)
                    waiters.setdefault(parent, []).append(owner)
                    flags.set(slot, PENDING)
                    break
                if heap._ranks[slot] < heap._ranks[parent]:
                    heap._swap(slot, parent)
                    moves += 1
                    flags.set(parent, RUNNING)
                    flags.set(slot, IDLE)
                    follow_up.extend(release(slot))
                else:
                    flags.set(slot, IDLE)
                    follow_up.extend(release(slot))
                    break
            finally:
                for lock in reversed(locks):
                    lock.release()
        with counter_lock:
            counter[0] += moves
        return follow_up

    _run_workers([owner for owner, _ in decreases], work)


def async_repair(heap: 'BatchHeap', increases: List[Tuple[int, 'Rank']], decreases: List[Tuple[int, 'Rank']]) -> None:
    """Asynchronous counterpart of BatchHeap._repair (same contract)."""
    counter = [0]
    counter_lock = threading.Lock()
    for owner, rank in increases:
        heap._ranks[heap.handles[owner]] = rank
    _down_phase(heap, [heap.handles[o] for o, _ in increases], counter, counter_lock)
    _up_phase(heap, decreases, counter, counter_lock)
    heap.swaps += counter[0]
