"""Rank-based layout quality: how trustworthy are 2D neighborhoods?

A 2D neighbor that is not a high-dimensional neighbor is penalized by how far
down the high-dimensional ranking it actually sits. The score lives in [0, 1];
1 means every 2D k-neighborhood is drawn from the true k-neighborhood.
"""

from __future__ import annotations

import numpy as np

from .affinities import pairwise_sq_euclidean
from .config import LayoutError


def _neighbor_order(points: np.ndarray) -> np.ndarray:
    """Rows of point indices sorted by distance (self first), stable in ties."""
    d2 = pairwise_sq_euclidean(points, points)
    np.fill_diagonal(d2, -1.0)  # pin self to the front
    return np.argsort(d2, axis=1, kind="stable")


def trustworthiness(high_dim_vectors: np.ndarray, coordinates, k: int = 10) -> float:
    """1 - scaled rank penalty over 2D neighbors missing from high-D neighborhoods.

    Euclidean distances on both sides; ties break by point index.
    """
    X = np.asarray(high_dim_vectors, dtype=np.float64)
    if isinstance(coordinates, dict):
        raise LayoutError("pass coordinates as an array aligned with the vectors")
    Y = np.asarray(coordinates, dtype=np.float64)
    n = X.shape[0]
    if Y.shape[0] != n:
        raise LayoutError(f"coordinate count {Y.shape[0]} != vector count {n}")
    if not 1 <= k < n / 2:
        raise LayoutError(f"k must satisfy 1 <= k < n/2, got k={k}, n={n}")

    high_order = _neighbor_order(X)
    low_order = _neighbor_order(Y)
    # rank_high[i, j]: 1-based rank of j among i's high-D neighbors (self = 0)
    rank_high = np.empty((n, n), dtype=np.int64)
    cols = np.arange(n)
    for i in range(n):
        rank_high[i, high_order[i]] = cols
    penalty = 0
    for i in range(n):
        low_knn = low_order[i, 1 : k + 1]
        ranks = rank_high[i, low_knn]
        penalty += int(np.sum(ranks[ranks > k] - k))
    return 1.0 - (2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0))) * penalty
