"""Static package - parallel closest-pair algorithms and the brute-force oracle."""

from typing import Callable, Dict

from .base import StaticConfig
from .brute_force import brute_force
from .divide_conquer import divide_conquer
from .rabin import rabin
from .sieve import sieve
from .incremental import incremental

# CLI name -> algorithm
ALGORITHMS: Dict[str, Callable] = {
    'divide-conquer': divide_conquer,
    'rabin': rabin,
    'sieve': sieve,
    'incremental': incremental,
    'brute': brute_force,
}

__all__ = [
    'StaticConfig',
    'brute_force',
    'divide_conquer',
    'rabin',
    'sieve',
    'incremental',
    'ALGORITHMS',
]
