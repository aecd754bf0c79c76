"""Spatial index package."""

from .kdtree import DynKdTree

__all__ = ['DynKdTree']
