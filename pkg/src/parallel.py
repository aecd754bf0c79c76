# ============================================================================
# src/parallel.py
# ============================================================================
"""Fork-join helpers on a shared thread pool."""

import math
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, TypeVar
import config

T = TypeVar('T')
R = TypeVar('R')

_pool: Optional[ThreadPoolExecutor] = None
_pool_size = 0
_pool_lock = threading.Lock()


def num_workers() -> int:
    """Current worker count (config.N_WORKERS, at least 1)."""
    return max(1, int(config.N_WORKERS))


def get_pool() -> Optional[ThreadPoolExecutor]:
    """Return the shared pool, or None when running sequentially.

    The pool is recreated whenever config.N_WORKERS changed since the last call.
    """
    global _pool, _pool_size
    n = num_workers()
    if n <= 1:
        return None
    with _pool_lock:
        if _pool is None or _pool_size != n:
            if _pool is not None:
                _pool.shutdown(wait=False)
            _pool = ThreadPoolExecutor(max_workers=n, thread_name_prefix='cp-worker')
            _pool_size = n
        return _pool


def set_num_workers(n: int) -> None:
    """Set the worker count for the whole process.

    Args:
        n: Number of workers (1 = sequential execution)
    """
    if n < 1:
        raise ValueError(f"Worker count must be >= 1, got {n}")
    config.N_WORKERS = int(n)
    get_pool()


class Forked:
    """Handle to a task forked onto the pool.

    join() runs the task inline if no worker has picked it up yet, so a thread
    that forks and then joins never waits on a queue it is itself blocking.
    """

    def __init__(self, fn: Callable[[], Any]):
        self._fn = fn
        self._future: Optional[Future] = None
        self._done = False
        self._value: Any = None
        pool = get_pool()
        if pool is not None:
            self._future = pool.submit(fn)

    def join(self) -> Any:
        if self._done:
            return self._value
        if self._future is None or self._future.cancel():
            self._value = self._fn()
        else:
            self._value = self._future.result()
        self._done = True
        return self._value


def fork(fn: Callable[[], T]) -> Forked:
    """Start fn in the background; call join() on the result to wait for it."""
    return Forked(fn)


def par_do(left: Callable[[], T], right: Callable[[], R]) -> Tuple[T, R]:
    """Run two thunks in parallel and return both results."""
    if get_pool() is None:
        return left(), right()
    task = Forked(left)
    right_value = right()
    return task.join(), right_value


def _chunks(items: Sequence[T], grain: int) -> List[Sequence[T]]:
    n = len(items)
    size = max(grain, math.ceil(n / (4 * num_workers())))
    return [items[i:i + size] for i in range(0, n, size)]


def parallel_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    grain: Optional[int] = None
) -> List[R]:
    """Apply fn to every item, preserving order.

    Args:
        fn: Function applied to each item
        items: Input sequence
        grain: Smallest chunk handed to a worker (default config.PARALLEL_GRAIN)

    Returns:
        List of fn(item) in input order
    """
    if grain is None:
        grain = config.PARALLEL_GRAIN
    if get_pool() is None or len(items) <= grain:
        return [fn(x) for x in items]

    chunks = _chunks(items, grain)
    tasks = [Forked(lambda c=c: [fn(x) for x in c]) for c in chunks[1:]]
    try:
        out = [fn(x) for x in chunks[0]]
    finally:
        parts = join_all(tasks)
    for part in parts:
        out.extend(part)
    return out


def join_all(tasks: Sequence[Forked]) -> List[Any]:
    """Join every task, then re-raise the first error if any task failed."""
    values: List[Any] = []
    error: Optional[BaseException] = None
    for task in tasks:
        try:
            values.append(task.join())
        except Exception as e:
            values.append(None)
            if error is None:
                error = e
    if error is not None:
        raise error
    return values


def parallel_min(
    fn: Callable[[T], Optional[Any]],
    items: Sequence[T],
    grain: Optional[int] = None
) -> Optional[Any]:
    """Minimum of fn(item) over items, skipping None values.

    Returns:
        The smallest non-None value, or None if every value was None
    """
    if grain is None:
        grain = config.PARALLEL_GRAIN

    def chunk_min(chunk: Sequence[T]) -> Optional[Any]:
        best = None
        for x in chunk:
            v = fn(x)
            if v is not None and (best is None or v < best):
                best = v
        return best

    if get_pool() is None or len(items) <= grain:
        return chunk_min(items)

    partial = parallel_map(chunk_min, _chunks(items, grain), grain=1)
    values = [v for v in partial if v is not None]
    return min(values) if values else None


@contextmanager
def config_overrides(**values: Any) -> Iterator[None]:
    """Temporarily override config attributes.

    Example:
        with config_overrides(N_WORKERS=1, PARTITION_MODE='simplified'):
            ...
    """
    original: Dict[str, Any] = {}
    try:
        for key, value in values.items():
            if not hasattr(config, key):
                raise ValueError(f"Unknown config parameter: {key}")
            original[key] = getattr(config, key)
            setattr(config, key, value)
        if 'N_WORKERS' in values:
            get_pool()
        yield
    finally:
        for key, value in original.items():
            setattr(config, key, value)
        if 'N_WORKERS' in original:
            get_pool()
