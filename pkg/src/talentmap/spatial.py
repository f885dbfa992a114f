"""Viewport index, display sizing, name search, and collaborator highlights.

The quadtree caches, per cell, its subtree's points pre-sorted by a global
priority order (importance descending, id ascending). A viewport query then
only concatenates already-ordered chunks and selects the top of the merge,
so level-of-detail answers stay well under interactive latency even when the
viewport covers the whole map.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .corpus import CorpusSnapshot

LEAF_CAPACITY = 64
MAX_DEPTH = 32

TALENT_BASE_SIZE = 2.0
TALENT_LOG_SCALE = 3.0
DATASET_SIZE = 6.0


class LayoutPoint(NamedTuple):
    node_id: str
    x: float
    y: float
    node_kind: str  # "talent" | "dataset"
    display_size: float
    importance: float


def node_display_size(publication_count: int, node_kind: str) -> float:
    """Talent size grows with log10 of the publication count; datasets are fixed."""
    if node_kind == "dataset":
        return DATASET_SIZE
    if publication_count < 0:
        raise ValueError(f"publication count must be >= 0, got {publication_count}")
    return TALENT_BASE_SIZE + TALENT_LOG_SCALE * math.log10(1 + publication_count)


class _Cell:
    __slots__ = ("x0", "y0", "x1", "y1", "children", "point_rows", "ordered", "max_importance")

    def __init__(self, x0: float, y0: float, x1: float, y1: float):
        self.x0, self.y0, self.x1, self.y1 = x0, y0, x1, y1
        self.children: list[_Cell] | None = None
        self.point_rows: list[int] | None = []
        self.ordered: np.ndarray | None = None  # subtree rows by priority order
        self.max_importance = 0.0


class QuadTree:
    """Immutable point index over a finished layout."""

    def __init__(self, points: Sequence[LayoutPoint], leaf_capacity: int = LEAF_CAPACITY):
        if not points:
            raise ValueError("cannot index an empty layout")
        if leaf_capacity < 1:
            raise ValueError("leaf capacity must be >= 1")
        self.points = list(points)
        n = len(self.points)
        self.xs = np.array([p.x for p in self.points], dtype=np.float64)
        self.ys = np.array([p.y for p in self.points], dtype=np.float64)
        if not (np.all(np.isfinite(self.xs)) and np.all(np.isfinite(self.ys))):
            raise ValueError("layout points must have finite coordinates")
        self.importance = np.array([p.importance for p in self.points], dtype=np.float64)
        ids = [p.node_id for p in self.points]
        id_rank = np.empty(n, dtype=np.int64)
        id_rank[sorted(range(n), key=lambda i: ids[i])] = np.arange(n)
        # priority: position in the global (importance desc, id asc) order
        order = np.lexsort((id_rank, -self.importance))
        self.priority = np.empty(n, dtype=np.int64)
        self.priority[order] = np.arange(n)
        self._leaf_capacity = leaf_capacity
        self.root = _Cell(
            float(self.xs.min()), float(self.ys.min()), float(self.xs.max()), float(self.ys.max())
        )
        for row in range(n):
            self._insert(row)
        self._finalize(self.root)

    def _insert(self, row: int) -> None:
        x, y = float(self.xs[row]), float(self.ys[row])
        cell = self.root
        depth = 0
        while cell.children is not None:
            cx = (cell.x0 + cell.x1) / 2.0
            cy = (cell.y0 + cell.y1) / 2.0
            cell = cell.children[(2 if y >= cy else 0) + (1 if x >= cx else 0)]
            depth += 1
        cell.point_rows.append(row)
        if len(cell.point_rows) > self._leaf_capacity:
            self._split(cell, depth)

    def _split(self, cell: _Cell, depth: int) -> None:
        if depth >= MAX_DEPTH:
            return
        rows = cell.point_rows
        # splitting identical coordinates forever is pointless; keep the leaf
        if all(self.xs[r] == self.xs[rows[0]] and self.ys[r] == self.ys[rows[0]] for r in rows):
            return
        cx = (cell.x0 + cell.x1) / 2.0
        cy = (cell.y0 + cell.y1) / 2.0
        cell.children = [
            _Cell(cell.x0, cell.y0, cx, cy),
            _Cell(cx, cell.y0, cell.x1, cy),
            _Cell(cell.x0, cy, cx, cell.y1),
            _Cell(cx, cy, cell.x1, cell.y1),
        ]
        cell.point_rows = None
        for r in rows:
            child = cell.children[
                (2 if self.ys[r] >= cy else 0) + (1 if self.xs[r] >= cx else 0)
            ]
            child.point_rows.append(r)
        for child in cell.children:
            if len(child.point_rows) > self._leaf_capacity:
                self._split(child, depth + 1)

    def _finalize(self, cell: _Cell) -> None:
        if cell.children is None:
            rows = np.asarray(cell.point_rows, dtype=np.int64)
            cell.ordered = rows[np.argsort(self.priority[rows])]
        else:
            for child in cell.children:
                self._finalize(child)
            merged = np.concatenate([c.ordered for c in cell.children])
            cell.ordered = merged[np.argsort(self.priority[merged])]
        cell.max_importance = float(self.importance[cell.ordered[0]]) if cell.ordered.size else 0.0

    def _collect(self, cell: _Cell, x0: float, y0: float, x1: float, y1: float, out: list[np.ndarray]) -> None:
        if cell.x0 > x1 or cell.x1 < x0 or cell.y0 > y1 or cell.y1 < y0:
            return
        if not cell.ordered.size:
            return
        if x0 <= cell.x0 and cell.x1 <= x1 and y0 <= cell.y0 and cell.y1 <= y1:
            out.append(cell.ordered)
            return
        if cell.children is None:
            rows = cell.ordered
            mask = (
                (self.xs[rows] >= x0)
                & (self.xs[rows] <= x1)
                & (self.ys[rows] >= y0)
                & (self.ys[rows] <= y1)
            )
            if mask.any():
                out.append(rows[mask])
            return
        for child in cell.children:
            self._collect(child, x0, y0, x1, y1, out)

    def query_rows(self, x0: float, y0: float, x1: float, y1: float, max_results: int) -> np.ndarray:
        """Rows inside the box in priority order, truncated to max_results."""
        chunks: list[np.ndarray] = []
        self._collect(self.root, x0, y0, x1, y1, chunks)
        if not chunks:
            return np.empty(0, dtype=np.int64)
        rows = np.concatenate(chunks)
        prio = self.priority[rows]
        if rows.size > max_results:
            # keep the max_results smallest priorities; priorities are unique
            cut = np.partition(prio, max_results - 1)[max_results - 1]
            keep = prio <= cut
            rows, prio = rows[keep], prio[keep]
        return rows[np.argsort(prio)]

    def traverse_points(self) -> list[LayoutPoint]:
        """Every stored point exactly once (tree audit helper)."""
        return [self.points[r] for r in self.root.ordered]


def build_quadtree(points: Sequence[LayoutPoint], leaf_capacity: int = LEAF_CAPACITY) -> QuadTree:
    return QuadTree(points, leaf_capacity)


def query_viewport(
    tree: QuadTree, bbox: tuple[float, float, float, float], max_results: int
) -> list[LayoutPoint]:
    """Points in the box ordered by (importance desc, id asc); when the box
    holds more than max_results points, only the most important survive."""
    x0, y0, x1, y1 = bbox
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"invalid bbox {bbox}")
    if max_results < 1:
        raise ValueError("max_results must be >= 1")
    rows = tree.query_rows(x0, y0, x1, y1, max_results)
    return [tree.points[r] for r in rows]


class SearchIndex:
    """Case-insensitive exact/prefix/substring name search over layout nodes."""

    def __init__(self, entries: Iterable[tuple[str, str, str]]):
        # (node_id, display_name, kind)
        self.entries = [(nid, name, kind, name.casefold()) for nid, name, kind in entries]
        self.entries.sort(key=lambda e: (e[1], e[0]))

    def search(self, query: str, kind: str | None = None, limit: int = 10) -> list[tuple[str, str]]:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        q = query.casefold().strip()
        if not q:
            return []
        exact: list[tuple[str, str]] = []
        prefix: list[tuple[str, str]] = []
        substr: list[tuple[str, str]] = []
        for nid, name, nkind, folded in self.entries:
            if kind is not None and nkind != kind:
                continue
            if folded == q:
                exact.append((nid, name))
            elif folded.startswith(q):
                prefix.append((nid, name))
            elif q in folded:
                substr.append((nid, name))
        return (exact + prefix + substr)[:limit]


def collaborator_highlight(
    author_id: str, snapshot: CorpusSnapshot, layout_ids: set[str] | frozenset[str]
) -> set[str]:
    """Ids of the author's past co-authors that are actually on the map."""
    if author_id not in snapshot.authors:
        raise KeyError(f"unknown author id {author_id!r}")
    return set(snapshot.coauthor_index.get(author_id, frozenset())) & set(layout_ids)
