# ============================================================================
# tests/test_parallel.py
# ============================================================================
"""Tests for the fork-join helpers."""

import threading
import pytest
import config
from src.parallel import (
    config_overrides,
    fork,
    get_pool,
    join_all,
    num_workers,
    par_do,
    parallel_map,
    parallel_min,
    set_num_workers,
)


def test_parallel_map_keeps_order(workers):
    items = list(range(1000))
    assert parallel_map(lambda x: x * x, items) == [x * x for x in items]
    assert parallel_map(lambda x: x, []) == []


def test_parallel_min_skips_none(workers):
    items = list(range(500))
    assert parallel_min(lambda x: None if x % 7 else (abs(x - 300), x), items) == (1, 301)
    assert parallel_min(lambda x: None, items) is None


def test_par_do_returns_both(workers):
    assert par_do(lambda: 'left', lambda: 'right') == ('left', 'right')


def test_nested_forks_finish(workers):
    def depth(n):
        if n == 0:
            return 1
        a, b = par_do(lambda: depth(n - 1), lambda: depth(n - 1))
        return a + b

    assert depth(6) == 64


def test_join_all_waits_for_every_task_before_raising(workers):
    finished = []
    lock = threading.Lock()

    def ok(i):
        with lock:
            finished.append(i)
        return i

    def bad():
        raise ValueError("boom")

    tasks = [fork(lambda: ok(0)), fork(bad), fork(lambda: ok(2)), fork(lambda: ok(3))]
    with pytest.raises(ValueError, match="boom"):
        join_all(tasks)
    assert sorted(finished) == [0, 2, 3]
    assert join_all([fork(lambda: ok(5)), fork(lambda: ok(6))]) == [5, 6]


def test_parallel_map_surfaces_worker_errors(workers):
    def fail_at(x):
        if x == 700:
            raise ValueError("bad item 700")
        return x

    with pytest.raises(ValueError, match="bad item 700"):
        parallel_map(fail_at, list(range(1000)))


def test_set_num_workers():
    with config_overrides(N_WORKERS=config.N_WORKERS):
        set_num_workers(3)
        assert num_workers() == 3
        assert get_pool() is not None
        set_num_workers(1)
        assert get_pool() is None
        with pytest.raises(ValueError, match="Worker count must be >= 1"):
            set_num_workers(0)


def test_config_overrides_restores_values():
    before = (config.N_WORKERS, config.PARTITION_MODE)
    with config_overrides(N_WORKERS=2, PARTITION_MODE='simplified'):
        assert (config.N_WORKERS, config.PARTITION_MODE) == (2, 'simplified')
    assert (config.N_WORKERS, config.PARTITION_MODE) == before

    with pytest.raises(ValueError, match="Unknown config parameter"):
        with config_overrides(NOT_A_SETTING=1):
            pass
    assert (config.N_WORKERS, config.PARTITION_MODE) == before
