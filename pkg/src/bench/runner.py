# ============================================================================
# src/bench/runner.py
# ============================================================================
"""Experiment driver: timed static and batch-dynamic runs with oracle checks."""

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence
import numpy as np
from src.bench.datasets import Dataset
from src.geometry.point import PairResult, Point
from src.parallel import config_overrides
from src.partition.sparse_partition import SparsePartition
from src.static import ALGORITHMS, StaticConfig, brute_force
import config

STATIC_RECOMPUTE = ('divide-conquer', 'rabin', 'sieve', 'incremental')


@dataclass
class RunReport:
    """Outcome of one timed run.

    Attributes:
        algorithm: Static algorithm name, or 'dynamic-<op>/<mode>'
        dataset: Dataset name
        batch_size: Batch size (n for static runs)
        seconds: Wall time of the timed section
        throughput: Points processed per second
        result: Closest pair after the run (None if fewer than 2 points remain)
        verified: True iff the oracle check ran and passed
        checked: True iff the oracle check ran
        batch: Batch index within a dynamic run (0 for static runs)
        points: Points processed by the timed section
        stats: Algorithm statistics (rounds, rebuilds, levels, ...)
    """
    algorithm: str
    dataset: str
    batch_size: int
    seconds: float
    throughput: float
    result: Optional[PairResult]
    verified: bool = False
    checked: bool = False
    batch: int = 0
    points: int = 0
    stats: Dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.checked and not self.verified


def _throughput(points: int, seconds: float) -> float:
    return points / seconds if seconds > 0 else float('inf')


def run_static(
    algo: str,
    dataset: Dataset,
    cfg: Optional[StaticConfig] = None,
    verify_cutoff: int = config.VERIFY_CUTOFF,
    verbose: int = config.VERBOSITY
) -> RunReport:
    """Time one static run after an untimed warm-up; verify against brute force for small inputs.

    Args:
        algo: One of config.STATIC_ALGORITHMS
        dataset: Input points
        cfg: Static parameters
        verify_cutoff: Largest n checked against brute force
        verbose: Verbosity level

    Returns:
        RunReport for the timed run
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"Unknown algorithm: {algo} (choose from {', '.join(ALGORITHMS)})")
    fn = ALGORITHMS[algo]
    cfg = cfg or StaticConfig()
    points = dataset.points

    if verbose >= 1:
        print(f"  {algo:<15} on {dataset.name} ({dataset.n:,} points)...")
    fn(points, cfg)

    stats: Dict = {}
    start = time.perf_counter()
    result = fn(points, cfg, stats)
    elapsed = time.perf_counter() - start

    checked = dataset.n <= verify_cutoff
    verified = checked and (result == brute_force(points) if algo != 'brute' else True)
    return RunReport(
        algorithm=algo,
        dataset=dataset.name,
        batch_size=dataset.n,
        seconds=elapsed,
        throughput=_throughput(dataset.n, elapsed),
        result=result,
        verified=verified,
        checked=checked,
        points=dataset.n,
        stats=stats,
    )


def _batches(items: Sequence, size: int) -> List[Sequence]:
    return [items[i:i + size] for i in range(0, len(items), size)]


def _check(sp: SparsePartition, present: Dict[int, Point], verify_cutoff: int,
           audit: bool) -> tuple:
    """Query the structure and compare with brute force; returns (result, checked, verified)."""
    if len(present) < 2:
        return None, False, False
    result = sp.closest_pair()
    if len(present) > verify_cutoff:
        return result, False, False
    ok = result == brute_force(list(present.values()))
    if audit:
        ok = ok and sp.validate().ok
    return result, True, ok


def run_dynamic(
    dataset: Dataset,
    op: str,
    batch_size: int,
    mode: Optional[str] = None,
    seed: int = config.RANDOM_SEED,
    protocol: Optional[str] = None,
    verify_cutoff: int = config.VERIFY_CUTOFF,
    audit: bool = False,
    verbose: int = config.VERBOSITY
) -> List[RunReport]:
    """Insert (or delete) the whole data set in equal batches, timing each batch.

    insert: start empty; the first batch builds the structure and is timed.
    delete: build over the full set untimed, then delete to exhaustion.

    Args:
        dataset: Input points
        op: 'insert' or 'delete'
        batch_size: Points per batch (>= 1)
        mode: 'theoretical' or 'simplified' (default config.PARTITION_MODE)
        seed: Seeds the batch order and the structure
        protocol: Heap update protocol (default config.HEAP_UPDATE_PROTOCOL)
        verify_cutoff: Largest live set checked against brute force after a batch
        audit: Also require validate() to be clean after every checked batch
        verbose: Verbosity level

    Returns:
        One RunReport per batch
    """
    if op not in ('insert', 'delete'):
        raise ValueError(f"Unknown dynamic operation: {op}")
    if batch_size < 1:
        raise ValueError(f"Batch size must be >= 1, got {batch_size}")
    mode = mode or config.PARTITION_MODE

    rng = np.random.Generator(np.random.Philox(seed))
    order = [dataset.points[i] for i in rng.permutation(dataset.n)]
    label = f"dynamic-{op}/{mode}"
    reports: List[RunReport] = []

    if op == 'insert':
        sp = SparsePartition(dataset.dim, mode=mode, protocol=protocol, seed=seed)
        present: Dict[int, Point] = {}
    else:
        sp = SparsePartition.build(order, mode=mode, protocol=protocol, seed=seed)
        present = {p.id: p for p in order}

    batches = _batches(order, batch_size)
    for b, batch in enumerate(batches, 1):
        start = time.perf_counter()
        if op == 'insert':
            sp.batch_insert(batch)
        else:
            sp.batch_delete([p.id for p in batch])
        elapsed = time.perf_counter() - start

        if op == 'insert':
            present.update((p.id, p) for p in batch)
        else:
            for p in batch:
                del present[p.id]
        result, checked, verified = _check(sp, present, verify_cutoff, audit)

        stats = dict(sp.last_stats)
        stats['levels'] = sp.L
        reports.append(RunReport(
            algorithm=label,
            dataset=dataset.name,
            batch_size=batch_size,
            seconds=elapsed,
            throughput=_throughput(len(batch), elapsed),
            result=result,
            verified=verified,
            checked=checked,
            batch=b,
            points=len(batch),
            stats=stats,
        ))
        if verbose >= 2:
            mark = '✓' if verified else ('✗' if checked else '-')
            print(f"    batch {b}/{len(batches)}: {elapsed:.4f}s L={sp.L} {mark}")

    if verbose >= 1:
        print(f"  {label} on {dataset.name}: {len(batches)} batches of {batch_size:,}, "
              f"{dynamic_throughput(reports):,.0f} points/s")
    return reports


def dynamic_throughput(reports: Sequence[RunReport]) -> float:
    """Total points over total batch time."""
    return _throughput(sum(r.points for r in reports), sum(r.seconds for r in reports))


@dataclass
class CrossoverRow:
    """Dynamic batch update versus static recompute at one batch size.

    Attributes:
        op: 'insert' or 'delete'
        batch_size: Batch size b
        dynamic_seconds: Time of one batch update plus the closest-pair query
        static_seconds: Time of the fastest static recompute
        static_algo: Name of that static algorithm
    """
    op: str
    batch_size: int
    dynamic_seconds: float
    static_seconds: float
    static_algo: str

    @property
    def winner(self) -> str:
        return 'dynamic' if self.dynamic_seconds < self.static_seconds else 'static'


def _fastest_static(points: List[Point], cfg: StaticConfig,
                    algos: Sequence[str]) -> tuple:
    best = None
    for algo in algos:
        start = time.perf_counter()
        ALGORITHMS[algo](points, cfg)
        elapsed = time.perf_counter() - start
        if best is None or elapsed < best[0]:
            best = (elapsed, algo)
    return best


def run_crossover(
    dataset: Dataset,
    batch_sizes: Sequence[int],
    mode: Optional[str] = None,
    seed: int = config.RANDOM_SEED,
    base_fraction: float = config.CROSSOVER_BASE_FRACTION,
    static_algos: Sequence[str] = STATIC_RECOMPUTE,
    verbose: int = config.VERBOSITY
) -> List[CrossoverRow]:
    """Compare one batch update with a static recompute over the same final set.

    insert: the structure holds base_fraction of the data; b more points arrive.
    delete: the structure holds everything; b points leave.

    Returns:
        One insert row and one delete row per batch size
    """
    if not 0 < base_fraction < 1:
        raise ValueError(f"Base fraction must lie in (0, 1), got {base_fraction}")
    rng = np.random.Generator(np.random.Philox(seed))
    order = [dataset.points[i] for i in rng.permutation(dataset.n)]
    base_n = max(2, int(base_fraction * dataset.n))
    cfg = StaticConfig(seed=seed)
    rows: List[CrossoverRow] = []

    for b in batch_sizes:
        if b < 1 or base_n + b > dataset.n or dataset.n - b < 2:
            raise ValueError(f"Batch size {b} does not fit a data set of {dataset.n} points")
        if verbose >= 1:
            print(f"  crossover b={b:,}...")

        base, batch = order[:base_n], order[base_n:base_n + b]
        sp = SparsePartition.build(base, mode=mode, seed=seed)
        start = time.perf_counter()
        sp.batch_insert(batch)
        sp.closest_pair()
        dyn = time.perf_counter() - start
        stat, algo = _fastest_static(base + batch, cfg, static_algos)
        rows.append(CrossoverRow('insert', b, dyn, stat, algo))

        sp = SparsePartition.build(order, mode=mode, seed=seed)
        start = time.perf_counter()
        sp.batch_delete([p.id for p in order[:b]])
        sp.closest_pair()
        dyn = time.perf_counter() - start
        stat, algo = _fastest_static(order[b:], cfg, static_algos)
        rows.append(CrossoverRow('delete', b, dyn, stat, algo))
    return rows


def crossover_points(rows: Sequence[CrossoverRow]) -> Dict[str, Dict[str, Optional[int]]]:
    """Per op: the largest batch size where dynamic wins and the smallest where static wins."""
    out: Dict[str, Dict[str, Optional[int]]] = {}
    for op in ('insert', 'delete'):
        mine = [r for r in rows if r.op == op]
        dyn = [r.batch_size for r in mine if r.winner == 'dynamic']
        sta = [r.batch_size for r in mine if r.winner == 'static']
        out[op] = {
            'dynamic_wins_up_to': max(dyn) if dyn else None,
            'static_wins_from': min(sta) if sta else None,
        }
    return out


def run_speedup(run: Callable[[], float], threads: int) -> Dict[str, float]:
    """Self-relative speedup of a timed callable.

    Args:
        run: Performs the work and returns its wall time in seconds
        threads: Worker count of the parallel run

    Returns:
        Dictionary with seq_seconds, par_seconds, threads, speedup
    """
    with config_overrides(N_WORKERS=1):
        seq = run()
    with config_overrides(N_WORKERS=threads):
        par = run()
    return {
        'seq_seconds': seq,
        'par_seconds': par,
        'threads': threads,
        'speedup': seq / par if par > 0 else float('inf'),
    }


def run_verification(
    dataset: Dataset,
    batch_size: int,
    modes: Sequence[str] = ('theoretical', 'simplified'),
    seed: int = config.RANDOM_SEED,
    verbose: int = config.VERBOSITY
) -> List[RunReport]:
    """Every static algorithm, then an insert-all and delete-all sweep per mode, all oracle-checked."""
    cutoff = max(dataset.n, 2)
    cfg = StaticConfig(seed=seed)
    reports = [run_static(algo, dataset, cfg, verify_cutoff=cutoff, verbose=verbose)
               for algo in config.STATIC_ALGORITHMS]
    for mode in modes:
        for op in ('insert', 'delete'):
            reports.extend(run_dynamic(dataset, op, batch_size, mode=mode, seed=seed,
                                       verify_cutoff=cutoff, audit=True, verbose=verbose))
    return reports
