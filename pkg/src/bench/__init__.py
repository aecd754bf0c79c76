"""Bench package - data sets, point files, experiment runner and reports."""

from .datasets import Dataset, generate, generate_uniform, generate_varden, nn_distances, nn_summary
from .point_io import load_points, save_points
from .runner import (
    RunReport,
    CrossoverRow,
    run_static,
    run_dynamic,
    run_crossover,
    run_speedup,
    run_verification,
    crossover_points,
    dynamic_throughput,
)
from .reports import reports_to_frame, save_csv, summarize_dynamic

__all__ = [
    'Dataset',
    'generate',
    'generate_uniform',
    'generate_varden',
    'nn_distances',
    'nn_summary',
    'load_points',
    'save_points',
    'RunReport',
    'CrossoverRow',
    'run_static',
    'run_dynamic',
    'run_crossover',
    'run_speedup',
    'run_verification',
    'crossover_points',
    'dynamic_throughput',
    'reports_to_frame',
    'save_csv',
    'summarize_dynamic',
]
