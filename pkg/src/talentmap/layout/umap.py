"""UMAP-style layout: fuzzy neighborhood graph plus sampled-edge SGD.

The graph side follows the standard construction: exact cosine k-NN, per-point
bandwidths calibrated against log2(k), probabilistic-union symmetrization.
The optimizer processes due edges in vectorized batches each epoch (instead of
one edge at a time), which keeps the run deterministic and fast without numba.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import curve_fit

from .affinities import knn_distances
from .config import DivergenceError, LayoutConfig, LayoutError, LayoutResult
from .metrics import trustworthiness
from .tsne import finalize_coordinates, prepare_matrix, _result_trustworthiness

_BANDWIDTH_TOL = 1e-5
_BANDWIDTH_MAX_ITER = 200
_GRAD_CLIP = 4.0
_CE_LOG_EVERY = 50


def smooth_bandwidths(knn_dists: np.ndarray, tol: float = _BANDWIDTH_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (rho, sigma): rho is the nearest-neighbor distance; sigma is
    bisected so sum_j exp(-max(0, d_ij - rho_i) / sigma_i) hits log2(k)."""
    n, k = knn_dists.shape
    target = np.log2(k)
    rho = knn_dists[:, 0].copy()
    sigma = np.empty(n, dtype=np.float64)
    for i in range(n):
        d = np.maximum(knn_dists[i] - rho[i], 0.0)
        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(_BANDWIDTH_MAX_ITER):
            s = float(np.sum(np.exp(-d / mid))) if mid > 0 else float(np.sum(d <= 0))
            if abs(s - target) <= tol:
                break
            if s > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid
    return rho, sigma


def fuzzy_membership_graph(vectors: np.ndarray, n_neighbors: int) -> sp.csr_matrix:
    """Symmetric fuzzy graph: memberships a_ij in (0, 1] combined by a+b-ab."""
    idx, dists = knn_distances(vectors, n_neighbors, metric="cosine")
    rho, sigma = smooth_bandwidths(dists)
    n = vectors.shape[0]
    vals = np.exp(-np.maximum(dists - rho[:, None], 0.0) / sigma[:, None])
    rows = np.repeat(np.arange(n), n_neighbors)
    a = sp.csr_matrix((vals.ravel(), (rows, idx.ravel())), shape=(n, n))
    at = a.T.tocsr()
    return (a + at - a.multiply(at)).tocsr()


def fit_attraction_curve(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares (a, b) so 1/(1 + a d^2b) tracks the desired falloff."""
    xs = np.linspace(0.0, spread * 3.0, 300)
    ys = np.where(xs < min_dist, 1.0, np.exp(-(xs - min_dist) / spread))
    (a, b), _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2.0 * b)), xs, ys, p0=(1.0, 1.0))
    return float(a), float(b)


@dataclass
class _EdgeSet:
    head: np.ndarray
    tail: np.ndarray
    weight: np.ndarray
    epochs_per_sample: np.ndarray


def _edges_from_graph(graph: sp.csr_matrix, epochs: int) -> _EdgeSet:
    coo = graph.tocoo()
    keep = coo.data >= coo.data.max() / epochs  # edges sampled at least once
    head, tail, w = coo.row[keep], coo.col[keep], coo.data[keep]
    order = np.lexsort((tail, head))
    head, tail, w = head[order], tail[order], w[order]
    return _EdgeSet(head, tail, w, w.max() / w)


def _cross_entropy(edges: _EdgeSet, coords: np.ndarray, a: float, b: float) -> float:
    """Fuzzy cross-entropy over the positive edges (the monitored objective)."""
    diff = coords[edges.head] - coords[edges.tail]
    d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
    q = 1.0 / (1.0 + a * d2**b)
    q = np.clip(q, 1e-12, 1.0 - 1e-12)
    w = edges.weight
    return float(np.sum(-w * np.log(q) - (1.0 - w) * np.log(1.0 - q)))


def run_umap(vectors, config: LayoutConfig | None = None) -> LayoutResult:
    """Reduce vectors to 2D with the UMAP objective; deterministic per seed."""
    config = config or LayoutConfig(method="umap")
    config.validate()
    ids, matrix = prepare_matrix(vectors)
    n = matrix.shape[0]
    settings = config.umap
    if n <= settings.n_neighbors:
        raise LayoutError(f"need more than n_neighbors={settings.n_neighbors} points, got {n}")
    graph = fuzzy_membership_graph(matrix, settings.n_neighbors)
    edges = _edges_from_graph(graph, settings.epochs)
    a, b = fit_attraction_curve(settings.min_dist)
    rng = np.random.default_rng(config.random_seed)
    coords = rng.uniform(-10.0, 10.0, size=(n, 2))
    next_due = edges.epochs_per_sample.copy()
    history: list[tuple[int, float]] = []
    nsr = settings.negative_sample_rate
    for epoch in range(1, settings.epochs + 1):
        alpha = 1.0 - (epoch - 1) / settings.epochs
        due = next_due <= epoch
        if np.any(due):
            hi, ti = edges.head[due], edges.tail[due]
            diff = coords[hi] - coords[ti]
            d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
            coeff = np.zeros_like(d2)
            nz = d2 > 0.0
            coeff[nz] = (-2.0 * a * b * d2[nz] ** (b - 1.0)) / (1.0 + a * d2[nz] ** b)
            step = np.clip(coeff[:, None] * diff, -_GRAD_CLIP, _GRAD_CLIP) * alpha
            np.add.at(coords, hi, step)
            np.add.at(coords, ti, -step)
            # uniformly sampled repulsive pushes, nsr per sampled edge
            neg = rng.integers(0, n, size=(hi.size, nsr))
            hrep = np.repeat(hi, nsr)
            trep = neg.ravel()
            diff_r = coords[hrep] - coords[trep]
            d2r = diff_r[:, 0] ** 2 + diff_r[:, 1] ** 2
            coeff_r = 2.0 * b / ((0.001 + d2r) * (1.0 + a * d2r**b))
            coeff_r[hrep == trep] = 0.0
            step_r = np.clip(coeff_r[:, None] * diff_r, -_GRAD_CLIP, _GRAD_CLIP) * alpha
            np.add.at(coords, hrep, step_r)
            next_due[due] += edges.epochs_per_sample[due]
        if not np.all(np.isfinite(coords)):
            raise DivergenceError(epoch)
        if epoch == 1 or epoch % _CE_LOG_EVERY == 0 or epoch == settings.epochs:
            history.append((epoch, _cross_entropy(edges, coords, a, b)))
    coords = finalize_coordinates(coords)
    trust = _result_trustworthiness(matrix, coords, config.random_seed)
    return LayoutResult(
        coordinates={ids[i]: (float(coords[i, 0]), float(coords[i, 1])) for i in range(n)},
        method="umap",
        objective=history[-1][1] if history else float("nan"),
        trustworthiness=trust,
        objective_history=history,
    )
