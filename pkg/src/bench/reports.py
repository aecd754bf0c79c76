# ============================================================================
# src/bench/reports.py
# ============================================================================
"""Report tables and CSV export."""

from typing import Dict, List, Optional, Sequence
import pandas as pd
from src.bench.runner import CrossoverRow, RunReport, crossover_points, dynamic_throughput

COLUMNS = [
    'algorithm', 'dataset', 'batch', 'batch_size', 'points', 'seconds', 'throughput',
    'pair_a', 'pair_b', 'dist', 'checked', 'verified',
]


def reports_to_frame(reports: Sequence[RunReport]) -> pd.DataFrame:
    """One row per report; the result pair is flattened into pair_a, pair_b, dist."""
    rows = []
    for r in reports:
        rows.append({
            'algorithm': r.algorithm,
            'dataset': r.dataset,
            'batch': r.batch,
            'batch_size': r.batch_size,
            'points': r.points,
            'seconds': r.seconds,
            'throughput': r.throughput,
            'pair_a': r.result.a if r.result else None,
            'pair_b': r.result.b if r.result else None,
            'dist': r.result.dist if r.result else None,
            'checked': r.checked,
            'verified': r.verified,
        })
    return pd.DataFrame(rows, columns=COLUMNS)


def save_csv(reports: Sequence[RunReport], path: str) -> None:
    reports_to_frame(reports).to_csv(path, index=False)


def _mark(r: RunReport) -> str:
    if not r.checked:
        return '-'
    return '✓' if r.verified else '✗'


def print_static_reports(reports: Sequence[RunReport], title: str = "STATIC CLOSEST PAIR") -> None:
    print(f"\n{'=' * 80}")
    print(title)
    print(f"{'=' * 80}")
    print(f"{'Algorithm':<16} {'Dataset':<20} {'Seconds':>10} {'Points/s':>14} "
          f"{'Distance':>12} {'Pair':>12} {'OK':>3}")
    print("-" * 80)
    for r in reports:
        pair = f"{r.result.a}-{r.result.b}" if r.result else '-'
        dist = f"{r.result.dist:.6g}" if r.result else '-'
        print(f"{r.algorithm:<16} {r.dataset:<20} {r.seconds:>10.4f} {r.throughput:>14,.0f} "
              f"{dist:>12} {pair:>12} {_mark(r):>3}")
    print("=" * 80)


def summarize_dynamic(reports: Sequence[RunReport]) -> List[Dict]:
    """Group per-batch reports by algorithm and dataset into one summary row each."""
    groups: Dict[tuple, List[RunReport]] = {}
    for r in reports:
        groups.setdefault((r.algorithm, r.dataset, r.batch_size), []).append(r)
    out = []
    for (algo, name, size), rs in groups.items():
        checked = [r for r in rs if r.checked]
        out.append({
            'algorithm': algo,
            'dataset': name,
            'batch_size': size,
            'batches': len(rs),
            'seconds': sum(r.seconds for r in rs),
            'throughput': dynamic_throughput(rs),
            'checked': len(checked),
            'verified': sum(1 for r in checked if r.verified),
            'max_levels': max(r.stats.get('levels', 0) for r in rs),
        })
    return out


def print_dynamic_reports(reports: Sequence[RunReport], title: str = "BATCH-DYNAMIC CLOSEST PAIR") -> None:
    print(f"\n{'=' * 80}")
    print(title)
    print(f"{'=' * 80}")
    print(f"{'Run':<28} {'Batch':>8} {'Batches':>8} {'Seconds':>10} {'Points/s':>14} {'Checked':>9}")
    print("-" * 80)
    for s in summarize_dynamic(reports):
        ok = '✓' if s['verified'] == s['checked'] else '✗'
        checked = f"{s['verified']}/{s['checked']} {ok}" if s['checked'] else '-'
        print(f"{s['algorithm']:<28} {s['batch_size']:>8,} {s['batches']:>8} "
              f"{s['seconds']:>10.4f} {s['throughput']:>14,.0f} {checked:>9}")
    print("=" * 80)


def print_crossover(rows: Sequence[CrossoverRow]) -> None:
    print(f"\n{'=' * 80}")
    print("DYNAMIC VS STATIC CROSSOVER")
    print(f"{'=' * 80}")
    print(f"{'Op':<8} {'Batch':>10} {'Dynamic (s)':>14} {'Static (s)':>14} {'Static algo':>16} {'Winner':>10}")
    print("-" * 80)
    for r in rows:
        print(f"{r.op:<8} {r.batch_size:>10,} {r.dynamic_seconds:>14.4f} {r.static_seconds:>14.4f} "
              f"{r.static_algo:>16} {r.winner:>10}")
    print("-" * 80)
    for op, found in crossover_points(rows).items():
        dyn = found['dynamic_wins_up_to']
        sta = found['static_wins_from']
        print(f"  {op:<7} dynamic wins up to b={dyn if dyn is not None else '-'}, "
              f"static wins from b={sta if sta is not None else '-'}")
    print("=" * 80)


def print_speedup(label: str, speedup: Dict[str, float]) -> None:
    print(f"  {label}: {speedup['seq_seconds']:.4f}s at 1 worker, "
          f"{speedup['par_seconds']:.4f}s at {speedup['threads']} workers "
          f"-> {speedup['speedup']:.2f}x")


def crossover_frame(rows: Sequence[CrossoverRow]) -> pd.DataFrame:
    return pd.DataFrame([{
        'op': r.op,
        'batch_size': r.batch_size,
        'dynamic_seconds': r.dynamic_seconds,
        'static_seconds': r.static_seconds,
        'static_algo': r.static_algo,
        'winner': r.winner,
    } for r in rows])


def any_failed(reports: Sequence[RunReport]) -> bool:
    return any(r.failed for r in reports)


def first_failure(reports: Sequence[RunReport]) -> Optional[RunReport]:
    return next((r for r in reports if r.failed), None)
