# ============================================================================
# main.py
# ============================================================================
"""Command-line entry point for closest-pair benchmarks.

Usage:
    python main.py gen --n 10000 --k 2 --dist uniform --out points.txt
    python main.py static --n 100000 --k 3 --algo all --csv static.csv
    python main.py dynamic --input points.txt --batch 1000 --op both --mode simplified
    python main.py verify --n 2000 --k 5 --dist varden
    python main.py crossover --n 100000 --k 5 --batches 100 1000 10000
"""

import argparse
import sys
import time
from contextlib import nullcontext
from typing import List, Optional
import config
from src.bench.datasets import Dataset, generate, nn_summary
from src.bench.point_io import load_points, save_points
from src.bench.reports import (
    any_failed,
    crossover_frame,
    first_failure,
    print_crossover,
    print_dynamic_reports,
    print_speedup,
    print_static_reports,
    save_csv,
)
from src.bench.runner import (
    run_crossover,
    run_dynamic,
    run_speedup,
    run_static,
    run_verification,
)
from src.parallel import config_overrides
from src.static import StaticConfig


def _add_data_args(p: argparse.ArgumentParser, n_default: int = config.DEFAULT_N) -> None:
    p.add_argument('--n', type=int, default=n_default, help=f'Number of points (default: {n_default:,})')
    p.add_argument('--k', type=int, default=config.DEFAULT_DIM, help=f'Dimension (default: {config.DEFAULT_DIM})')
    p.add_argument('--seed', type=int, default=config.RANDOM_SEED, help=f'Random seed (default: {config.RANDOM_SEED})')
    p.add_argument('--dist', choices=['uniform', 'varden'], default='uniform', help='Point distribution')
    p.add_argument('--input', help='Read points from a file instead of generating them')


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument('--threads', type=int, default=None, help='Worker pool size (1 = sequential)')
    p.add_argument('--verify-cutoff', type=int, default=config.VERIFY_CUTOFF,
                   help=f'Largest n checked against brute force (default: {config.VERIFY_CUTOFF:,})')
    p.add_argument('--csv', help='Write the reports to this CSV file')
    p.add_argument('--quiet', action='store_true', help='Suppress progress messages')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Parallel batch-dynamic closest pair benchmarks')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='Generate a point file')
    _add_data_args(gen)
    gen.add_argument('--out', required=True, help='Output point file')
    gen.add_argument('--stats', action='store_true', help='Print nearest-neighbor statistics')

    static = sub.add_parser('static', help='Time the static algorithms')
    _add_data_args(static)
    _add_run_args(static)
    static.add_argument('--algo', choices=config.STATIC_ALGORITHMS + ['all'], default='all')
    static.add_argument('--speedup', action='store_true', help='Also measure 1-worker vs N-worker time')

    dynamic = sub.add_parser('dynamic', help='Time batch insertions and deletions')
    _add_data_args(dynamic)
    _add_run_args(dynamic)
    dynamic.add_argument('--batch', type=int, default=config.DEFAULT_BATCH,
                         help=f'Batch size (default: {config.DEFAULT_BATCH:,})')
    dynamic.add_argument('--op', choices=['insert', 'delete', 'both'], default='both')
    dynamic.add_argument('--mode', choices=['theoretical', 'simplified'], default=config.PARTITION_MODE)
    dynamic.add_argument('--protocol', choices=['pull', 'naive'], default=config.HEAP_UPDATE_PROTOCOL)
    dynamic.add_argument('--speedup', action='store_true', help='Also measure 1-worker vs N-worker time')

    verify = sub.add_parser('verify', help='Check every algorithm against brute force')
    _add_data_args(verify, n_default=2000)
    verify.add_argument('--threads', type=int, default=None, help='Worker pool size (1 = sequential)')
    verify.add_argument('--batch', type=int, default=100, help='Dynamic batch size (default: 100)')
    verify.add_argument('--csv', help='Write the reports to this CSV file')
    verify.add_argument('--quiet', action='store_true', help='Suppress progress messages')

    cross = sub.add_parser('crossover', help='Compare one batch update with a static recompute')
    _add_data_args(cross)
    cross.add_argument('--threads', type=int, default=None, help='Worker pool size (1 = sequential)')
    cross.add_argument('--batches', type=int, nargs='+', required=True, help='Batch sizes to compare')
    cross.add_argument('--mode', choices=['theoretical', 'simplified'], default=config.PARTITION_MODE)
    cross.add_argument('--csv', help='Write the comparison to this CSV file')
    cross.add_argument('--quiet', action='store_true', help='Suppress progress messages')
    return parser


def _dataset(args: argparse.Namespace) -> Dataset:
    if args.input:
        return load_points(args.input)
    return generate(args.dist, args.n, args.k, seed=args.seed)


def cmd_gen(args: argparse.Namespace, verbose: int) -> int:
    ds = _dataset(args)
    save_points(ds, args.out)
    if verbose >= 1:
        print(f"✓ Wrote {ds.name} ({ds.n:,} points, k={ds.dim}) to {args.out}")
    if args.stats:
        s = nn_summary(ds)
        print(f"  nearest-neighbor distance: mean {s['mean']:.6g}, std {s['std']:.6g}, "
              f"min {s['min']:.6g}, max {s['max']:.6g}, cv {s['cv']:.3f}")
    return 0


def cmd_static(args: argparse.Namespace, verbose: int) -> int:
    ds = _dataset(args)
    algos = config.STATIC_ALGORITHMS if args.algo == 'all' else [args.algo]
    cfg = StaticConfig(seed=args.seed)
    reports = [run_static(a, ds, cfg, verify_cutoff=args.verify_cutoff, verbose=verbose) for a in algos]
    print_static_reports(reports)

    if args.speedup:
        threads = args.threads or config.N_WORKERS
        for a in algos:
            print_speedup(a, run_speedup(
                lambda a=a: run_static(a, ds, cfg, verify_cutoff=0, verbose=0).seconds, threads))
    if args.csv:
        save_csv(reports, args.csv)
    return _finish(reports)


def cmd_dynamic(args: argparse.Namespace, verbose: int) -> int:
    ds = _dataset(args)
    ops = ['insert', 'delete'] if args.op == 'both' else [args.op]
    reports = []
    for op in ops:
        reports.extend(run_dynamic(ds, op, args.batch, mode=args.mode, seed=args.seed,
                                   protocol=args.protocol, verify_cutoff=args.verify_cutoff,
                                   verbose=verbose))
    print_dynamic_reports(reports)

    if args.speedup:
        threads = args.threads or config.N_WORKERS
        for op in ops:
            print_speedup(f"dynamic-{op}", run_speedup(
                lambda op=op: sum(r.seconds for r in run_dynamic(
                    ds, op, args.batch, mode=args.mode, seed=args.seed, protocol=args.protocol,
                    verify_cutoff=0, verbose=0)), threads))
    if args.csv:
        save_csv(reports, args.csv)
    return _finish(reports)


def cmd_verify(args: argparse.Namespace, verbose: int) -> int:
    ds = _dataset(args)
    start = time.time()
    reports = run_verification(ds, args.batch, seed=args.seed, verbose=verbose)
    print_static_reports([r for r in reports if not r.algorithm.startswith('dynamic')],
                         title=f"VERIFY STATIC: {ds.name}")
    print_dynamic_reports([r for r in reports if r.algorithm.startswith('dynamic')],
                          title=f"VERIFY DYNAMIC: {ds.name}")
    if verbose >= 1:
        checked = sum(1 for r in reports if r.checked)
        print(f"{checked} oracle checks in {time.time() - start:.1f}s")
    if args.csv:
        save_csv(reports, args.csv)
    return _finish(reports)


def cmd_crossover(args: argparse.Namespace, verbose: int) -> int:
    ds = _dataset(args)
    rows = run_crossover(ds, args.batches, mode=args.mode, seed=args.seed, verbose=verbose)
    print_crossover(rows)
    if args.csv:
        crossover_frame(rows).to_csv(args.csv, index=False)
    return 0


def _finish(reports) -> int:
    bad = first_failure(reports)
    if bad is not None:
        print(f"✗ Verification failed: {bad.algorithm} on {bad.dataset} (batch {bad.batch})")
    return 1 if any_failed(reports) else 0


COMMANDS = {
    'gen': cmd_gen,
    'static': cmd_static,
    'dynamic': cmd_dynamic,
    'verify': cmd_verify,
    'crossover': cmd_crossover,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns 0 on success, 1 on a failed check, 2 on usage errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    verbose = 0 if getattr(args, 'quiet', False) else config.VERBOSITY
    threads = getattr(args, 'threads', None)
    if threads is not None and threads < 1:
        print(f"Error: --threads must be >= 1, got {threads}")
        return 2

    overrides = config_overrides(N_WORKERS=threads) if threads else nullcontext()
    try:
        with overrides:
            return COMMANDS[args.command](args, verbose)
    except (ValueError, OSError) as e:
        print(f"Error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
