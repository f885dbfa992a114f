"""High-dimensional neighbor affinities with per-point bandwidth calibration.

Each point gets a Gaussian bandwidth found by bisection so that the entropy of
its conditional neighbor distribution matches the requested perplexity. Only
the 3*perplexity nearest neighbors participate, which keeps the matrix sparse
at the scale this pipeline targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .config import LayoutError

_DIST_BLOCK = 2048


def pairwise_sq_euclidean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.sum(a * a, axis=1)
    bb = np.sum(b * b, axis=1)
    d = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d, 0.0, out=d)
    return d


def cosine_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """1 - cosine similarity; zero rows act as maximally distant."""
    an = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-300)
    bn = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-300)
    d = 1.0 - an @ bn.T
    np.maximum(d, 0.0, out=d)
    return d


def _metric_block(metric: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if metric == "cosine":
        return cosine_distances(a, b)
    if metric == "sqeuclidean":
        return pairwise_sq_euclidean(a, b)
    raise LayoutError(f"unknown metric {metric!r}")


def knn_distances(
    vectors: np.ndarray, n_neighbors: int, metric: str = "cosine"
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors per row (self excluded), ascending by distance.

    Returns (indices, distances), each of shape (n, n_neighbors). Ties break by
    index so results are reproducible.
    """
    n = vectors.shape[0]
    if not 1 <= n_neighbors <= n - 1:
        raise LayoutError(f"n_neighbors {n_neighbors} out of range for n={n}")
    idx_out = np.empty((n, n_neighbors), dtype=np.int64)
    dist_out = np.empty((n, n_neighbors), dtype=np.float64)
    for start in range(0, n, _DIST_BLOCK):
        stop = min(start + _DIST_BLOCK, n)
        d = _metric_block(metric, vectors[start:stop], vectors)
        rows = np.arange(start, stop)
        d[rows - start, rows] = np.inf  # exclude self
        part = np.argpartition(d, n_neighbors - 1, axis=1)[:, :n_neighbors]
        part_d = np.take_along_axis(d, part, axis=1)
        # order neighbors by (distance, index) for deterministic output
        order = np.lexsort((part, part_d), axis=1)
        idx_out[start:stop] = np.take_along_axis(part, order, axis=1)
        dist_out[start:stop] = np.take_along_axis(part_d, order, axis=1)
    return idx_out, dist_out


@dataclass
class AffinityResult:
    """Sparse affinities plus the conditionals they were symmetrized from."""

    joint: sp.csr_matrix
    conditional: sp.csr_matrix
    betas: np.ndarray
    n_neighbors: int
    failed_points: list[int] = field(default_factory=list)


def _calibrate_row(dists: np.ndarray, target_perplexity: float, tol: float, max_iter: int):
    """Bisection on the precision beta until exp(entropy) matches perplexity.

    Distances are shifted by their minimum before exponentiation; the shift
    cancels in the normalized distribution and keeps exp() in range.
    """
    d = dists - dists.min()
    beta, lo, hi = 1.0, 0.0, np.inf
    p = None
    for _ in range(max_iter):
        w = np.exp(-beta * d)
        sw = float(w.sum())
        p = w / sw
        # entropy in nats, computed without log(0)
        h = float(np.log(sw) + beta * float(np.dot(d, w)) / sw)
        perp = float(np.exp(h))
        if abs(perp - target_perplexity) <= tol * target_perplexity:
            return beta, p, True
        if perp > target_perplexity:
            lo = beta
            beta = beta * 2.0 if hi == np.inf else (lo + hi) / 2.0
        else:
            hi = beta
            beta = (lo + hi) / 2.0
    return beta, p, False


def compute_affinities(
    vectors: np.ndarray,
    perplexity: float,
    tolerance: float = 1e-5,
    max_bisection: int = 50,
    metric: str = "cosine",
) -> AffinityResult:
    """Symmetrized neighbor affinities: p_ij = (p_j|i + p_i|j) / 2n.

    Per-point bandwidths are bisected so each conditional distribution's
    perplexity lands within `tolerance * perplexity` of the target. Points
    whose bisection cannot converge (duplicate-heavy neighborhoods) fall back
    to a uniform conditional and are reported in `failed_points`.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if n < 3:
        raise LayoutError(f"need at least 3 points, got {n}")
    if perplexity >= n:
        raise LayoutError(f"perplexity {perplexity} must be < n={n}")
    m = min(int(round(3 * perplexity)), n - 1)
    nn_idx, nn_dist = knn_distances(vectors, m, metric)

    rows = np.repeat(np.arange(n), m)
    cols = nn_idx.ravel()
    vals = np.empty(n * m, dtype=np.float64)
    betas = np.empty(n, dtype=np.float64)
    failed: list[int] = []
    for i in range(n):
        beta, p, ok = _calibrate_row(nn_dist[i], perplexity, tolerance, max_bisection)
        if not ok:
            p = np.full(m, 1.0 / m)
            failed.append(i)
        betas[i] = beta
        vals[i * m : (i + 1) * m] = p

    conditional = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    joint = (conditional + conditional.T) / (2.0 * n)
    joint = joint.tocsr()
    return AffinityResult(joint=joint, conditional=conditional, betas=betas, n_neighbors=m, failed_points=failed)


def realized_perplexity(conditional: sp.csr_matrix) -> np.ndarray:
    """Recompute exp(entropy) of each emitted conditional distribution."""
    n = conditional.shape[0]
    out = np.empty(n, dtype=np.float64)
    indptr, data = conditional.indptr, conditional.data
    for i in range(n):
        p = data[indptr[i] : indptr[i + 1]]
        p = p[p > 0]
        out[i] = float(np.exp(-np.sum(p * np.log(p))))
    return out
