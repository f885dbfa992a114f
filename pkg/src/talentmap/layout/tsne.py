"""Barnes-Hut t-SNE: KL-divergence gradient descent over 2D coordinates.

The attractive force runs exactly over the sparse affinities; the repulsive
force is summarized by the quadtree in `bhtree`. The optimizer follows the
classic two-phase schedule: early exaggeration with low momentum, then the
plain objective with high momentum, plus per-parameter gain adaptation.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .affinities import AffinityResult, compute_affinities
from .bhtree import ForceTree
from .config import DivergenceError, LayoutConfig, LayoutError, LayoutResult, EXPORT_HALF_EXTENT
from .metrics import trustworthiness

_KL_LOG_EVERY = 50
_MIN_GAIN = 0.01


def _as_joint(affinities) -> sp.csr_matrix:
    if isinstance(affinities, AffinityResult):
        return affinities.joint
    return sp.csr_matrix(affinities)


class _SparsePairs:
    """COO view of the affinity matrix reused every iteration."""

    def __init__(self, joint: sp.csr_matrix):
        coo = joint.tocoo()
        keep = coo.data > 0
        self.rows = coo.row[keep]
        self.cols = coo.col[keep]
        self.p = coo.data[keep].astype(np.float64)
        self.n = joint.shape[0]
        self.p_log_p = float(np.dot(self.p, np.log(self.p)))

    def attraction(self, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exact sparse attractive term: sum_j p_ij u_ij (y_i - y_j)."""
        diff = coords[self.rows] - coords[self.cols]
        u = 1.0 / (1.0 + diff[:, 0] ** 2 + diff[:, 1] ** 2)
        w = self.p * u
        out = np.empty((self.n, 2), dtype=np.float64)
        out[:, 0] = np.bincount(self.rows, weights=w * diff[:, 0], minlength=self.n)
        out[:, 1] = np.bincount(self.rows, weights=w * diff[:, 1], minlength=self.n)
        return out, u


def tsne_gradient(affinities, coordinates: np.ndarray, theta: float) -> np.ndarray:
    """Gradient of KL(P || Q) at the given 2D coordinates.

    theta controls the Barnes-Hut cell-opening criterion; 0 reproduces the
    exact O(n^2) gradient.
    """
    grad, _, _ = _gradient_stats(_SparsePairs(_as_joint(affinities)), np.asarray(coordinates, dtype=np.float64), theta)
    return grad


def _gradient_stats(pairs: _SparsePairs, coords: np.ndarray, theta: float):
    if not np.all(np.isfinite(coords)):
        raise LayoutError("coordinates must be finite")
    attr, u = pairs.attraction(coords)
    tree = ForceTree(coords)
    rep_num, z = tree.repulsion(theta)
    grad = 4.0 * (attr - rep_num / z)
    # KL(P||Q) restricted to stored pairs: sum p ln p - sum p ln u + ln Z
    kl = pairs.p_log_p - float(np.dot(pairs.p, np.log(u))) + float(np.log(z))
    return grad, z, kl


def kl_divergence_exact(affinities, coordinates: np.ndarray) -> float:
    """Exact KL(P || Q), O(n^2). Independent of the gradient path; used for
    objective logging verification and finite-difference checks."""
    joint = _as_joint(affinities)
    coords = np.asarray(coordinates, dtype=np.float64)
    n = coords.shape[0]
    d2 = (
        np.sum(coords**2, axis=1)[:, None]
        + np.sum(coords**2, axis=1)[None, :]
        - 2.0 * coords @ coords.T
    )
    np.maximum(d2, 0.0, out=d2)
    u = 1.0 / (1.0 + d2)
    np.fill_diagonal(u, 0.0)
    z = u.sum()
    coo = joint.tocoo()
    keep = coo.data > 0
    p = coo.data[keep]
    q = u[coo.row[keep], coo.col[keep]] / z
    return float(np.sum(p * np.log(p / q)))


def prepare_matrix(vectors) -> tuple[list[str], np.ndarray]:
    """Accept a mapping id->vector or a bare array; ids sort canonically."""
    if isinstance(vectors, Mapping):
        ids = sorted(vectors)
        matrix = np.stack([np.asarray(vectors[i], dtype=np.float64) for i in ids])
    else:
        matrix = np.asarray(vectors, dtype=np.float64)
        ids = [str(i) for i in range(matrix.shape[0])]
    if matrix.ndim != 2:
        raise LayoutError("expected a 2D array of vectors")
    if not np.all(np.isfinite(matrix)):
        raise LayoutError("input vectors must be finite")
    return ids, matrix


def finalize_coordinates(coords: np.ndarray) -> np.ndarray:
    """Center on the origin and scale uniformly into the export box."""
    coords = coords - coords.mean(axis=0)
    extent = float(np.abs(coords).max())
    if extent > 0:
        coords = coords * (EXPORT_HALF_EXTENT / extent)
    return coords


def _result_trustworthiness(matrix: np.ndarray, coords: np.ndarray, seed: int, sample_cap: int = 2000) -> float:
    n = matrix.shape[0]
    if n <= sample_cap:
        return trustworthiness(matrix, coords, k=min(10, (n - 1) // 2))
    rng = np.random.default_rng(seed)
    pick = rng.choice(n, size=sample_cap, replace=False)
    return trustworthiness(matrix[pick], coords[pick], k=10)


def effective_perplexity(perplexity: float, n: int) -> float:
    """Clamp the configured perplexity below n/3 (affinities need 3u neighbors)."""
    return max(2.0, min(perplexity, (n - 1) / 3.0))


def run_tsne(vectors, config: LayoutConfig | None = None) -> LayoutResult:
    """Reduce vectors to 2D by Barnes-Hut t-SNE; deterministic for a fixed seed."""
    config = config or LayoutConfig()
    config.validate()
    ids, matrix = prepare_matrix(vectors)
    n = matrix.shape[0]
    if n < 10:
        raise LayoutError(f"t-SNE needs at least 10 points, got {n}")
    settings = config.tsne
    perp = effective_perplexity(settings.perplexity, n)
    affinities = compute_affinities(matrix, perp, metric="cosine")
    pairs = _SparsePairs(affinities.joint)
    exaggerated = _SparsePairs(affinities.joint * settings.early_exaggeration)
    rng = np.random.default_rng(config.random_seed)
    coords = 1e-4 * rng.standard_normal((n, 2))
    update = np.zeros_like(coords)
    gains = np.ones_like(coords)
    history: list[tuple[int, float]] = []
    for it in range(1, settings.iterations + 1):
        active = exaggerated if it <= settings.exaggeration_iters else pairs
        grad, _, _ = _gradient_stats(active, coords, settings.theta)
        momentum = settings.momentum_early if it <= settings.momentum_switch_iter else settings.momentum_late
        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.clip(gains, _MIN_GAIN, None, out=gains)
        update = momentum * update - settings.learning_rate * (gains * grad)
        coords = coords + update
        coords -= coords.mean(axis=0)
        if not np.all(np.isfinite(coords)):
            raise DivergenceError(it)
        if it == 1 or it % _KL_LOG_EVERY == 0 or it == settings.iterations:
            # always log the true objective, never the exaggerated surrogate
            _, _, kl = _gradient_stats(pairs, coords, settings.theta)
            history.append((it, float(kl)))
    coords = finalize_coordinates(coords)
    trust = _result_trustworthiness(matrix, coords, config.random_seed)
    return LayoutResult(
        coordinates={ids[i]: (float(coords[i, 0]), float(coords[i, 1])) for i in range(n)},
        method="tsne",
        objective=history[-1][1] if history else float("nan"),
        trustworthiness=trust,
        objective_history=history,
    )
