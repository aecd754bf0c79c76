# ============================================================================
# config.py
# ============================================================================
"""Configuration constants and parameters for batch-dynamic closest pair."""

from typing import List

# General parameters
RANDOM_SEED = 42
VERBOSITY = 1  # 0=silent, 1=progress, 2=debug

# Fork-join runtime
N_WORKERS = 4          # Worker pool size (1 = sequential execution)
PARALLEL_GRAIN = 512   # Smallest slice of work handed to a worker

# Grid key arithmetic
MAX_KEY_MAGNITUDE = 2 ** 62  # Reject points whose |coord / side| exceeds this

# ============================================================================
# Grid dictionary
# ============================================================================

GRID_MAX_LOAD = 0.7      # Double the shard count when boxes exceed this load
GRID_SHARD_SLOTS = 256   # Nominal box capacity of one shard
GRID_MIN_SHARDS = 1

# ============================================================================
# Batch heap
# ============================================================================

HEAP_MIN_CAPACITY = 16
HEAP_SHRINK_FRACTION = 0.25  # Halve capacity when occupancy falls below this
HEAPIFY_MODE = 'sync'        # Options: 'sync', 'async'

# ============================================================================
# Sparse partition
# ============================================================================

PARTITION_MODE = 'theoretical'  # Options: 'theoretical', 'simplified'
HEAP_UPDATE_PROTOCOL = 'pull'   # Options: 'pull', 'naive'
KD_TREE_MIN_DIM = 5             # Use the k-d tree box index from this dimension up
ASSERT_PACKING_BOUNDS = True    # Check |down|, |up| <= m * 3^k per batch

# k-d tree
KD_LEAF_CAPACITY = 16
KD_COMPACT_FRACTION = 0.5  # Rebuild when invalid entries exceed this share

# ============================================================================
# Static algorithms
# ============================================================================

SAMPLE_EXPONENT = 0.8   # Rabin sample size n^c
BASE_CASE_CUTOFF = 64   # Brute force at or below this many points

STATIC_ALGORITHMS: List[str] = ['divide-conquer', 'rabin', 'sieve', 'incremental', 'brute']

# ============================================================================
# Benchmark driver
# ============================================================================

VERIFY_CUTOFF = 20000   # Oracle-check runs up to this many points
DEFAULT_N = 10000
DEFAULT_DIM = 2
DEFAULT_BATCH = 1000

# Variable-density ("varden") generator
VARDEN_RESTART_PROB = 0.01  # Probability the walker jumps to a uniform location
VARDEN_STEP_SCALE = 0.05    # Gaussian step sigma as a fraction of unit spacing

CROSSOVER_BASE_FRACTION = 0.4  # Share of the dataset held before the measured batch
