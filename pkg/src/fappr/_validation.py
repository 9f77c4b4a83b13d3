"""Input checks shared by the estimator classes."""
from __future__ import annotations

import numbers

import numpy as np

from .graph import WeightedGraph, from_edges


def check_unit_interval(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not 0 < value < 1:
        raise ValueError(f"{name} must be a real number in (0, 1), got {value!r}")
    return float(value)


def check_positive_int(name: str, value, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_graph(X) -> WeightedGraph:
    """Accept a :class:`WeightedGraph` or an ``(m, 2)`` / ``(m, 3)`` edge array."""
    if isinstance(X, WeightedGraph):
        return X
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ValueError(f"expected a WeightedGraph or an (m, 2|3) edge array, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("edge array is empty")
    ids = arr[:, :2]
    if not np.all(np.equal(np.mod(ids, 1), 0)) or np.any(ids < 0):
        raise ValueError("node ids must be non-negative integers")
    return from_edges(arr.tolist())


def check_sources(sources, n: int) -> np.ndarray:
    src = np.atleast_1d(np.asarray(sources))
    if src.ndim != 1 or not np.issubdtype(src.dtype, np.integer):
        raise ValueError("sources must be a 1-d array of integer node ids")
    if src.size and (src.min() < 0 or src.max() >= n):
        raise ValueError(f"source ids must lie in [0, {n})")
    return src.astype(np.int64)
