"""Grid package - hashed box dictionaries."""

from .grid_dict import GridDict, hash_key
from .box_index import KdBoxIndex, make_box_index

__all__ = ['GridDict', 'KdBoxIndex', 'hash_key', 'make_box_index']
