#!/usr/bin/env python3
"""
Acceptance suite runner.

Runs the correctness oracles, invariant checks and qualitative performance
trends at a configurable scale and prints a ✓/✗ summary:
1. Static oracle equivalence (all algorithms vs brute force)
2. Dynamic oracle equivalence under random mixed batches (both modes)
3. validate() clean after every batch, packing bounds asserted
4. Heap equivalence (sync vs async heapify) and swap-count bound
5. Level-count bound
6. Throughput trend and crossover existence (reported, not asserted, with --perf)

Usage:
    python scripts/run_acceptance_suite.py
    python scripts/run_acceptance_suite.py --seeds 50 --static-n 2000 --dynamic-n 10000 --batches 200
    python scripts/run_acceptance_suite.py --perf --perf-n 100000 --threads 8
"""

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import argparse
import math
import time
from typing import Dict, List, Tuple
import numpy as np
import config
from src.bench.datasets import generate
from src.bench.reports import print_crossover
from src.bench.runner import crossover_points, dynamic_throughput, run_crossover, run_dynamic
from src.geometry.point import Point
from src.heap.batch_heap import BatchHeap, HeapEntry, KeyUpdate
from src.parallel import config_overrides
from src.partition.sparse_partition import SparsePartition
from src.static import ALGORITHMS, StaticConfig, brute_force


def check_static(n: int, seeds: int, dims: List[int], verbose: bool) -> Tuple[bool, str]:
    """Every static algorithm equals brute force (same pair, bitwise-equal distance)."""
    runs = 0
    for dist in ('uniform', 'varden'):
        for k in dims:
            for seed in range(seeds):
                ds = generate(dist, n, k, seed=seed)
                want = brute_force(ds.points)
                cfg = StaticConfig(seed=seed)
                for name, fn in ALGORITHMS.items():
                    got = fn(ds.points, cfg)
                    runs += 1
                    if got != want:
                        return False, f"{name} on {ds.name} seed {seed}: {got} != {want}"
            if verbose:
                print(f"  ✓ static {dist} k={k}: {seeds} seeds")
    return True, f"{runs} runs agree"


def _mixed_batches(sp_modes: Dict[str, SparsePartition], live: Dict[int, Point], pool: List[Point],
                   rng: np.random.Generator, n_batches: int, max_batch: int) -> Tuple[bool, str]:
    checks = 0
    for b in range(n_batches):
        size = int(rng.integers(1, max_batch + 1))
        if rng.random() < 0.5 and pool:
            batch = [pool.pop() for _ in range(min(size, len(pool)))]
            for sp in sp_modes.values():
                sp.batch_insert(batch)
            live.update((p.id, p) for p in batch)
        else:
            ids = sorted(live)
            picks = rng.choice(len(ids), size=min(size, len(ids) - 2), replace=False)
            gone = [ids[i] for i in picks]
            for sp in sp_modes.values():
                sp.batch_delete(gone)
            for i in gone:
                pool.append(live.pop(i))

        want = brute_force(list(live.values()))
        for mode, sp in sp_modes.items():
            got = sp.closest_pair()
            if got != want:
                return False, f"{mode} batch {b}: {got} != {want}"
            report = sp.validate()
            if not report.ok:
                return False, f"{mode} batch {b}: {report.first}"
            checks += 1
    return True, f"{checks} states checked"


def check_dynamic(n: int, k: int, n_batches: int, max_batch: int, seed: int,
                  verbose: bool) -> Tuple[bool, str]:
    """Random mixed batches: oracle, validate() and mode agreement after every batch."""
    ds = generate('uniform', 2 * n, k, seed=seed)
    base, pool = ds.points[:n], list(reversed(ds.points[n:]))
    modes = {
        'theoretical': SparsePartition.build(base, mode='theoretical', seed=seed),
        'simplified': SparsePartition.build(base, mode='simplified', seed=seed),
    }
    live = {p.id: p for p in base}
    rng = np.random.Generator(np.random.Philox(seed))
    try:
        ok, msg = _mixed_batches(modes, live, pool, rng, n_batches, max_batch)
    except AssertionError as e:
        return False, f"packing bound: {e}"
    if verbose:
        print(f"  {'✓' if ok else '✗'} dynamic k={k}: {msg}")
    return ok, msg


def check_heap(runs: int, n_ops: int, verbose: bool) -> Tuple[bool, str]:
    """Sync and async heapify drain identically; heap order holds after every call."""
    for run in range(runs):
        rng = np.random.Generator(np.random.Philox(run))
        heaps = [BatchHeap(heapify_mode='sync'), BatchHeap(heapify_mode='async')]
        keys: Dict[int, float] = {}
        next_id = 0
        for _ in range(n_ops):
            op = rng.integers(3)
            if op == 0 or not keys:
                m = int(rng.integers(1, 64))
                entries = [HeapEntry(float(rng.integers(0, 1000)), next_id + i) for i in range(m)]
                next_id += m
                for h in heaps:
                    h.batch_insert(entries)
                keys.update((e.owner, e.key) for e in entries)
            elif op == 1:
                owners = list(keys)
                picks = rng.choice(len(owners), size=min(len(owners), int(rng.integers(1, 64))), replace=False)
                gone = [owners[i] for i in picks]
                for h in heaps:
                    h.batch_delete(gone)
                for o in gone:
                    del keys[o]
            else:
                owners = list(keys)
                picks = rng.choice(len(owners), size=min(len(owners), int(rng.integers(1, 64))), replace=False)
                updates = [KeyUpdate(owners[i], keys[owners[i]], float(rng.integers(0, 1000)))
                           for i in picks]
                for h in heaps:
                    h.heapify(updates)
                keys.update((u.owner, u.new_key) for u in updates)
            for h in heaps:
                if h.check_order() is not None:
                    return False, f"run {run}: heap order broken ({h.heapify_mode})"
        if heaps[0].drain() != heaps[1].drain():
            return False, f"run {run}: sync and async drains differ"
    if verbose:
        print(f"  ✓ heap equivalence: {runs} runs of {n_ops} batches")
    return True, f"{runs} runs"


def check_heap_work(n: int, seeds: int, verbose: bool) -> Tuple[bool, str]:
    """Average swaps for m updates stay within 4 m (log2((n+m)/m) + 2)."""
    worst = 0.0
    for m in (16, 256, 4096):
        total = 0
        for seed in range(seeds):
            rng = np.random.Generator(np.random.Philox(seed))
            heap = BatchHeap.build([HeapEntry(float(x), i) for i, x in enumerate(rng.random(n))])
            picks = rng.choice(n, size=m, replace=False)
            updates = [KeyUpdate(int(i), heap.entry(int(i)).key, float(rng.random())) for i in picks]
            heap.swaps = 0
            heap.heapify(updates)
            total += heap.swaps
        bound = 4 * m * (math.log2((n + m) / m) + 2)
        ratio = total / seeds / bound
        worst = max(worst, ratio)
        if verbose:
            print(f"  {'✓' if ratio <= 1 else '✗'} heap work m={m}: {total / seeds:,.0f} swaps, bound {bound:,.0f}")
        if ratio > 1:
            return False, f"m={m}: {total / seeds:.0f} swaps > {bound:.0f}"
    return True, f"worst ratio {worst:.2f}"


def check_levels(n: int, seeds: int, verbose: bool) -> Tuple[bool, str]:
    """L <= 8 log2 n for uniform data at k = 2 and k = 7."""
    bound = 8 * math.log2(n)
    worst = 0
    for k in (2, 7):
        for seed in range(seeds):
            sp = SparsePartition.build(generate('uniform', n, k, seed=seed).points, seed=seed,
                                       mode='simplified')
            worst = max(worst, sp.L)
            if sp.L > bound:
                return False, f"k={k} seed {seed}: L={sp.L} > {bound:.1f}"
        if verbose:
            print(f"  ✓ levels k={k}: max L={worst} <= {bound:.1f}")
    return True, f"max L={worst}"


def report_perf(n: int, threads: int, verbose: bool) -> None:
    """Throughput trend over batch sizes and the dynamic/static crossover (reported only)."""
    ds = generate('uniform', n, 2)
    with config_overrides(N_WORKERS=threads):
        print(f"\nInsert throughput on {ds.name} at {threads} workers:")
        for b in (n // 10000 or 1, n // 100):
            reports = run_dynamic(ds, 'insert', b, verify_cutoff=0, verbose=0)
            print(f"  batch {b:>8,}: {dynamic_throughput(reports):>14,.0f} points/s")

        ds5 = generate('uniform', n, 5)
        rows = run_crossover(ds5, [max(1, n // 1000), n // 100, n // 10, n // 2],
                             verbose=1 if verbose else 0)
        print_crossover(rows)
        found = crossover_points(rows)['insert']
        both = found['dynamic_wins_up_to'] is not None and found['static_wins_from'] is not None
        print(f"  {'✓' if both else '⚠'} insert crossover {'located' if both else 'not located at these sizes'}")


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(description='Run the acceptance suite')
    parser.add_argument('--seeds', type=int, default=5, help='Seeds per static configuration (default: 5)')
    parser.add_argument('--static-n', type=int, default=500, help='Points per static run (default: 500)')
    parser.add_argument('--dynamic-n', type=int, default=1000, help='Initial dynamic points (default: 1000)')
    parser.add_argument('--batches', type=int, default=40, help='Mixed batches per dynamic run (default: 40)')
    parser.add_argument('--max-batch', type=int, default=100, help='Largest mixed batch (default: 100)')
    parser.add_argument('--heap-runs', type=int, default=10, help='Heap fuzz runs (default: 10)')
    parser.add_argument('--heap-ops', type=int, default=200, help='Batches per heap fuzz run (default: 200)')
    parser.add_argument('--level-n', type=int, default=10000, help='Points for the level-count check (default: 10,000)')
    parser.add_argument('--threads', type=int, default=config.N_WORKERS, help='Worker pool size')
    parser.add_argument('--perf', action='store_true', help='Also report throughput trend and crossover')
    parser.add_argument('--perf-n', type=int, default=100000, help='Points for the performance reports')
    parser.add_argument('--quiet', action='store_true', help='Suppress progress messages')

    args = parser.parse_args()
    verbose = not args.quiet

    print(f"\n{'#' * 70}")
    print("ACCEPTANCE SUITE")
    print(f"{'#' * 70}\n")

    start = time.time()
    results = []
    with config_overrides(N_WORKERS=args.threads):
        results.append(("Static oracle", *check_static(args.static_n, args.seeds, [2, 3, 5, 7], verbose)))
        for k in (2, 3):
            results.append((f"Dynamic oracle k={k}", *check_dynamic(
                args.dynamic_n, k, args.batches, args.max_batch, config.RANDOM_SEED, verbose)))
        results.append(("Heap equivalence", *check_heap(args.heap_runs, args.heap_ops, verbose)))
        results.append(("Heap work bound", *check_heap_work(10 ** 5, 3, verbose)))
        results.append(("Level-count bound", *check_levels(args.level_n, 3, verbose)))

    if args.perf:
        report_perf(args.perf_n, args.threads, verbose)

    print(f"\n{'=' * 70}")
    print("SUMMARY")
    print(f"{'=' * 70}")
    for name, ok, msg in results:
        print(f"{'✓' if ok else '✗'} {name:<24} {msg}")
    print(f"{'=' * 70}")
    print(f"Elapsed: {time.time() - start:.1f}s\n")

    return 0 if all(ok for _, ok, _ in results) else 1


if __name__ == '__main__':
    sys.exit(main())
