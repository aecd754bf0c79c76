# ============================================================================
# src/__init__.py
# ============================================================================

"""Parallel batch-dynamic closest pair package."""

__version__ = "0.2.0"
