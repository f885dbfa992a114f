"""Quadtree summarization of the t-SNE repulsive field.

The tree groups distant points into cells; a cell whose angular size
(diagonal / distance) falls below theta stands in for all its points, cutting
the repulsive term from O(n^2) to O(n log n). theta = 0 never accepts a
summary, so the traversal degenerates to the exact pairwise sum.

Two equivalent walkers exist: a numba-compiled per-point stack walk (fast
path) and a breadth-first numpy frontier (fallback when numba is absent).
Both make identical accept/expand decisions; only summation order differs.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

_MAX_DEPTH = 64


def jitter_duplicates(coords: np.ndarray, scale: float = 1e-9) -> np.ndarray:
    """Return coordinates with exact duplicates nudged apart deterministically."""
    _, inverse, counts = np.unique(coords, axis=0, return_inverse=True, return_counts=True)
    if counts.max(initial=0) <= 1:
        return coords
    coords = coords.copy()
    seen: dict[int, int] = {}
    for i, g in enumerate(inverse):
        g = int(g)
        k = seen.get(g, 0)
        seen[g] = k + 1
        if k:
            coords[i, 0] += scale * k
            coords[i, 1] += scale * (k % 7 + 1)
    return coords


def _build_tree_arrays(coords: np.ndarray):
    """Array-encoded quadtree: one insertion per point, children contiguous.

    Returns (cx, cy, half, count, sx, sy, child0, n_nodes). child0 < 0 marks a
    leaf; a leaf with count > 1 only occurs at the depth cap.
    """
    n = coords.shape[0]
    cap = 16 * n + 64
    cx = np.zeros(cap)
    cy = np.zeros(cap)
    half = np.zeros(cap)
    count = np.zeros(cap, dtype=np.int64)
    sx = np.zeros(cap)
    sy = np.zeros(cap)
    child0 = np.full(cap, -1, dtype=np.int64)
    resident = np.full(cap, -1, dtype=np.int64)
    lo_x, lo_y = coords[:, 0].min(), coords[:, 1].min()
    hi_x, hi_y = coords[:, 0].max(), coords[:, 1].max()
    cx[0] = (lo_x + hi_x) / 2.0
    cy[0] = (lo_y + hi_y) / 2.0
    half[0] = max(max(hi_x - lo_x, hi_y - lo_y) / 2.0, 1e-12) * 1.0001
    n_nodes = 1
    for i in range(n):
        x = coords[i, 0]
        y = coords[i, 1]
        node = 0
        depth = 0
        while True:
            count[node] += 1
            sx[node] += x
            sy[node] += y
            if child0[node] >= 0:
                q = (2 if y >= cy[node] else 0) + (1 if x >= cx[node] else 0)
                node = child0[node] + q
                depth += 1
                continue
            if count[node] == 1:
                resident[node] = i
                break
            if depth >= _MAX_DEPTH:
                break
            # occupied leaf: split, move the resident point down, re-descend.
            # the resident's true coordinates matter: reconstructing them from
            # the running sums would leave its leaf microscopically off the
            # point itself, breaking the exact self-pair exclusion
            r_idx = resident[node]
            px = coords[r_idx, 0]
            py = coords[r_idx, 1]
            resident[node] = -1
            base = n_nodes
            if base + 4 > cap:
                raise MemoryError("quadtree node budget exceeded")
            child0[node] = base
            h = half[node] / 2.0
            for q in range(4):
                j = base + q
                cx[j] = cx[node] + (h if q & 1 else -h)
                cy[j] = cy[node] + (h if q & 2 else -h)
                half[j] = h
            n_nodes += 4
            qr = (2 if py >= cy[node] else 0) + (1 if px >= cx[node] else 0)
            r = base + qr
            count[r] = 1
            sx[r] = px
            sy[r] = py
            resident[r] = r_idx
            q = (2 if y >= cy[node] else 0) + (1 if x >= cx[node] else 0)
            node = base + q
            depth += 1
    return cx, cy, half, count, sx, sy, child0, n_nodes


def _walk_python(coords, cx, cy, half, count, sx, sy, child0, theta):
    """Per-point stack walk; reference semantics for both implementations."""
    n = coords.shape[0]
    num = np.zeros((n, 2))
    zsum = 0.0
    theta2 = theta * theta
    stack = np.empty(4 * _MAX_DEPTH + 8, dtype=np.int64)
    for i in range(n):
        x = coords[i, 0]
        y = coords[i, 1]
        top = 0
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            c = count[node]
            if c == 0:
                continue
            mx = sx[node] / c
            my = sy[node] / c
            dx = x - mx
            dy = y - my
            d2 = dx * dx + dy * dy
            is_leaf = child0[node] < 0
            w = 2.0 * half[node]  # full width
            if d2 > 0.0 and (is_leaf or 2.0 * w * w < theta2 * d2):
                u = 1.0 / (1.0 + d2)
                zsum += c * u
                num[i, 0] += c * u * u * dx
                num[i, 1] += c * u * u * dy
            elif not is_leaf:
                for q in range(4):
                    stack[top] = child0[node] + q
                    top += 1
    return num, zsum


if _HAVE_NUMBA:
    _build_tree_numba = numba.njit(cache=True)(_build_tree_arrays)
    _walk_numba = numba.njit(cache=True)(_walk_python)


class ForceTree:
    """Quadtree over 2D points, ready for repulsion queries."""

    def __init__(self, coords: np.ndarray):
        coords = np.ascontiguousarray(jitter_duplicates(np.asarray(coords, dtype=np.float64)))
        self.coords = coords
        build = _build_tree_numba if _HAVE_NUMBA else _build_tree_arrays
        (self.cx, self.cy, self.half, self.count, self.sx, self.sy, self.child0, self.n_nodes) = build(coords)

    def repulsion(self, theta: float) -> tuple[np.ndarray, float]:
        """(sum_j u_ij^2 (y_i - y_j), Z) with u_ij = 1/(1 + |y_i - y_j|^2),
        self-pairs skipped; Z sums u over all ordered pairs."""
        walk = _walk_numba if _HAVE_NUMBA else _walk_python
        num, zsum = walk(
            self.coords, self.cx, self.cy, self.half, self.count, self.sx, self.sy, self.child0, theta
        )
        return num, float(zsum)
