# ============================================================================
# src/bench/point_io.py
# ============================================================================
"""Plain-text point files: one point per line, whitespace or comma separated."""

import math
import re
from pathlib import Path
from typing import List, Union
from src.bench.datasets import Dataset
from src.geometry.point import Point

_SEP = re.compile(r'[,\s]+')


def load_points(path: Union[str, Path]) -> Dataset:
    """Read a point file; ids follow line order, '#' lines and blank lines are skipped.

    Raises:
        ValueError: "<path>:<line>: ..." for ragged or non-numeric rows,
            duplicate points and files with fewer than 2 points
    """
    path = Path(path)
    points: List[Point] = []
    seen = {}
    dim = None
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            text = line.strip()
            if not text or text.startswith('#'):
                continue
            fields = [x for x in _SEP.split(text) if x]
            try:
                coords = tuple(float(x) for x in fields)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field in {text!r}") from None
            if not all(math.isfinite(c) for c in coords):
                raise ValueError(f"{path}:{lineno}: non-finite coordinate in {text!r}")
            if dim is None:
                dim = len(coords)
            elif len(coords) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} fields, got {len(coords)}")
            if coords in seen:
                raise ValueError(f"{path}:{lineno}: duplicates the point on line {seen[coords]}")
            seen[coords] = lineno
            points.append(Point(len(points), coords))

    if len(points) < 2:
        raise ValueError(f"{path}:0: need at least 2 points, found {len(points)}")
    return Dataset(path.stem, dim, points, provenance='loaded')


def save_points(ds: Dataset, path: Union[str, Path]) -> None:
    """Write one point per line at 17 significant digits (exact round trip)."""
    with open(path, 'w') as f:
        f.write(f"# {ds.name} n={ds.n} k={ds.dim}\n")
        for p in ds.points:
            f.write(' '.join(f"{c:.17g}" for c in p.coords) + '\n')
