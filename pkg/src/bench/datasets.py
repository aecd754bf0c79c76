# ============================================================================
# src/bench/datasets.py
# ============================================================================
"""Synthetic data sets and nearest-neighbor statistics."""

import math
from dataclasses import dataclass
from typing import Dict, List
import numpy as np
from scipy.spatial import cKDTree
from src.geometry.point import Point
import config


@dataclass
class Dataset:
    """A named point set.

    Attributes:
        name: "<k>D-<Kind>-<size>", e.g. 2D-Uniform-10K
        dim: Dimension k
        points: Points with ids 0..n-1
        provenance: 'generated' or 'loaded'
    """
    name: str
    dim: int
    points: List[Point]
    provenance: str = 'generated'

    @property
    def n(self) -> int:
        return len(self.points)

    def coords(self) -> np.ndarray:
        return np.asarray([p.coords for p in self.points], dtype=float)


def size_label(n: int) -> str:
    """10000 -> '10K', 1000000 -> '1M', 1500 -> '1500'."""
    for unit, scale in (('B', 10 ** 9), ('M', 10 ** 6), ('K', 10 ** 3)):
        if n >= scale and n % scale == 0:
            return f"{n // scale}{unit}"
    return str(n)


def dataset_name(kind: str, n: int, k: int) -> str:
    return f"{k}D-{kind}-{size_label(n)}"


def _check_args(n: int, k: int) -> None:
    if n < 2:
        raise ValueError(f"A data set needs at least 2 points, got n={n}")
    if k < 1:
        raise ValueError(f"Dimension must be >= 1, got k={k}")


def _distinct(X: np.ndarray, redraw) -> np.ndarray:
    """Redraw rows that duplicate an earlier row until all rows are distinct."""
    while True:
        _, first = np.unique(X, axis=0, return_index=True)
        dup = np.setdiff1d(np.arange(len(X)), first)
        if len(dup) == 0:
            return X
        X[dup] = redraw(len(dup))


def _to_points(X: np.ndarray) -> List[Point]:
    return [Point(i, tuple(row)) for i, row in enumerate(X.tolist())]


def generate_uniform(n: int, k: int, seed: int = config.RANDOM_SEED) -> Dataset:
    """n points i.i.d. uniform in [0, sqrt(n)]^k."""
    _check_args(n, k)
    rng = np.random.Generator(np.random.Philox(seed))
    side = math.sqrt(n)
    X = rng.uniform(0.0, side, size=(n, k))
    X = _distinct(X, lambda m: rng.uniform(0.0, side, size=(m, k)))
    return Dataset(dataset_name('Uniform', n, k), k, _to_points(X))


def generate_varden(
    n: int,
    k: int,
    seed: int = config.RANDOM_SEED,
    restart_prob: float = config.VARDEN_RESTART_PROB,
    step_scale: float = config.VARDEN_STEP_SCALE
) -> Dataset:
    """Variable-density clusters from a restarting random walk.

    A walker emits one point per step, moving by a Gaussian step of scale
    step_scale, and jumps to a uniform location in [0, sqrt(n)]^k with
    probability restart_prob. Each cluster draws its own step multiplier
    in [1, 10) so cluster densities vary.

    Args:
        n: Number of points
        k: Dimension
        seed: Seed of the walk
        restart_prob: Per-step jump probability
        step_scale: Base step standard deviation

    Returns:
        Dataset named "<k>D-SS-varden-<size>"
    """
    _check_args(n, k)
    rng = np.random.Generator(np.random.Philox(seed))
    side = math.sqrt(n)

    restarts = rng.random(n) < restart_prob
    restarts[0] = True
    cluster = np.cumsum(restarts) - 1
    n_clusters = int(cluster[-1]) + 1
    starts = rng.uniform(0.0, side, size=(n_clusters, k))
    scales = step_scale * rng.uniform(1.0, 10.0, size=n_clusters)

    steps = rng.normal(0.0, 1.0, size=(n, k)) * scales[cluster][:, None]
    steps[restarts] = 0.0
    walk = np.cumsum(steps, axis=0)
    # Offset each cluster so its walk starts at its own origin
    walk -= walk[np.flatnonzero(restarts)][cluster]
    X = starts[cluster] + walk

    X = _distinct(X, lambda m: rng.uniform(0.0, side, size=(m, k)))
    return Dataset(dataset_name('SS-varden', n, k), k, _to_points(X))


GENERATORS = {
    'uniform': generate_uniform,
    'varden': generate_varden,
}


def generate(dist: str, n: int, k: int, seed: int = config.RANDOM_SEED) -> Dataset:
    if dist not in GENERATORS:
        raise ValueError(f"Unknown distribution: {dist} (choose from {sorted(GENERATORS)})")
    return GENERATORS[dist](n, k, seed)


def nn_distances(ds: Dataset) -> np.ndarray:
    """Nearest-neighbor distance of every point."""
    tree = cKDTree(ds.coords())
    dist, _ = tree.query(ds.coords(), k=2)
    return dist[:, 1]


def nn_summary(ds: Dataset) -> Dict[str, float]:
    """Mean, std, min and max of the nearest-neighbor distances."""
    d = nn_distances(ds)
    return {
        'mean': float(d.mean()),
        'std': float(d.std()),
        'min': float(d.min()),
        'max': float(d.max()),
        'cv': float(d.std() / d.mean()) if d.mean() > 0 else 0.0,
    }
