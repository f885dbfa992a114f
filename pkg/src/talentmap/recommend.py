"""Exact top-k cosine recommendation with exclusion sets.

Collaborator lists exclude everyone the source author has ever co-published
with (plus the author themself); dataset-user lists exclude past users of the
dataset. Search is exact brute force over the aggregated vectors: the corpus
scale (tens of thousands of unit vectors) makes blocked matrix products
cheap, and exactness keeps the tables reproducible across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import CorpusSnapshot
from .embeddings import EmbeddingStore

SCORE_CLAMP = 1.0
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class RecommendationEntry:
    source_id: str
    target_id: str
    score: float
    rank: int


@dataclass
class RecommendationTable:
    collaborator_recs: dict[str, list[RecommendationEntry]] = field(default_factory=dict)
    dataset_user_recs: dict[str, list[RecommendationEntry]] = field(default_factory=dict)
    skipped_authors: int = 0
    skipped_datasets: int = 0


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Definitional cosine, clamped to [-1, 1] against rounding."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity undefined for zero vector")
    return float(np.clip(float(u @ v) / (nu * nv), -SCORE_CLAMP, SCORE_CLAMP))


def _rank_top_k(scores: np.ndarray, id_rank: np.ndarray, k: int, eligible: np.ndarray) -> list[tuple[int, float]]:
    """Indices of the k best eligible scores, ordered by (score desc, id asc).

    Ties at the selection boundary are resolved exactly: every candidate tied
    with the k-th score competes by id before the cut is made.
    """
    elig_idx = np.flatnonzero(eligible)
    if elig_idx.size == 0:
        return []
    elig_scores = scores[elig_idx]
    if elig_idx.size > k:
        kth = np.partition(elig_scores, elig_idx.size - k)[elig_idx.size - k]
        keep = elig_scores >= kth
        elig_idx = elig_idx[keep]
        elig_scores = elig_scores[keep]
    order = np.lexsort((id_rank[elig_idx], -elig_scores))[:k]
    chosen = elig_idx[order]
    return [(int(i), float(scores[i])) for i in chosen]


class CandidatePool:
    """Sorted candidate ids stacked into one matrix, reused across queries."""

    def __init__(self, candidates: Mapping[str, np.ndarray]):
        self.ids = sorted(candidates)
        if not self.ids:
            raise ValueError("candidate pool is empty")
        self.matrix = np.stack([np.asarray(candidates[i], dtype=np.float64) for i in self.ids])
        self.norms = np.linalg.norm(self.matrix, axis=1)
        if np.any(self.norms == 0.0):
            raise ValueError("candidate vectors must be nonzero")
        self.index = {cid: i for i, cid in enumerate(self.ids)}
        self.id_rank = np.arange(len(self.ids))

    def eligible_mask(self, excluded: Iterable[str]) -> np.ndarray:
        mask = np.ones(len(self.ids), dtype=bool)
        for eid in excluded:
            j = self.index.get(eid)
            if j is not None:
                mask[j] = False
        return mask

    def top_k_rows(
        self, scores: np.ndarray, k: int, excluded: Iterable[str]
    ) -> list[tuple[str, float]]:
        picked = _rank_top_k(scores, self.id_rank, k, self.eligible_mask(excluded))
        return [(self.ids[i], s) for i, s in picked]


def top_k_candidates(
    query: np.ndarray,
    candidates: Mapping[str, np.ndarray] | CandidatePool,
    k: int,
    excluded: frozenset[str] | set[str] = frozenset(),
) -> list[RecommendationEntry]:
    """The k candidates most cosine-similar to `query`, skipping `excluded`.

    Ties break by ascending target id; fewer than k are returned only when the
    eligible pool is smaller.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query = np.asarray(query, dtype=np.float64)
    qnorm = float(np.linalg.norm(query))
    if qnorm == 0.0:
        raise ValueError("query vector must be nonzero")
    pool = candidates if isinstance(candidates, CandidatePool) else CandidatePool(candidates)
    scores = np.clip((pool.matrix @ query) / (pool.norms * qnorm), -SCORE_CLAMP, SCORE_CLAMP)
    return [
        RecommendationEntry(source_id="", target_id=cid, score=s, rank=r)
        for r, (cid, s) in enumerate(pool.top_k_rows(scores, k, excluded), start=1)
    ]


def top_k_batch(
    queries: Mapping[str, np.ndarray],
    pool: CandidatePool,
    k: int,
    excluded: Mapping[str, frozenset[str] | set[str]],
) -> dict[str, list[RecommendationEntry]]:
    """top_k_candidates for many sources at once, via blocked matrix products."""
    out: dict[str, list[RecommendationEntry]] = {}
    source_ids = list(queries)
    for start in range(0, len(source_ids), _BLOCK_ROWS):
        chunk = source_ids[start : start + _BLOCK_ROWS]
        block = np.stack([np.asarray(queries[s], dtype=np.float64) for s in chunk])
        qnorms = np.linalg.norm(block, axis=1)
        if np.any(qnorms == 0.0):
            raise ValueError("query vectors must be nonzero")
        scores_block = np.clip(
            (block @ pool.matrix.T) / np.outer(qnorms, pool.norms), -SCORE_CLAMP, SCORE_CLAMP
        )
        for row, sid in enumerate(chunk):
            out[sid] = [
                RecommendationEntry(sid, cid, s, r)
                for r, (cid, s) in enumerate(
                    pool.top_k_rows(scores_block[row], k, excluded.get(sid, frozenset())), start=1
                )
            ]
    return out


def build_recommendation_table(
    snapshot: CorpusSnapshot,
    store: EmbeddingStore,
    k_collab: int = 30,
    k_users: int = 150,
) -> RecommendationTable:
    """Top-k_collab never-collaborated authors per author, and top-k_users
    never-used authors per dataset. Entities without vectors are skipped and
    counted in the summary fields."""
    table = RecommendationTable(
        skipped_authors=len(snapshot.authors) - len(store.author_vectors),
        skipped_datasets=len(snapshot.datasets) - len(store.dataset_vectors),
    )
    if not store.author_vectors:
        return table
    pool = CandidatePool(store.author_vectors)
    collab_excluded = {
        aid: snapshot.coauthor_index.get(aid, frozenset()) | {aid}
        for aid in store.author_vectors
    }
    table.collaborator_recs = top_k_batch(store.author_vectors, pool, k_collab, collab_excluded)
    if store.dataset_vectors:
        user_excluded = {
            did: snapshot.dataset_user_index.get(did, frozenset())
            for did in store.dataset_vectors
        }
        table.dataset_user_recs = top_k_batch(store.dataset_vectors, pool, k_users, user_excluded)
    return table


def write_recommendations(table: RecommendationTable, path: str | Path) -> None:
    """One JSON object per line; scores printed with 6 decimal digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for source in sorted(table.collaborator_recs):
            for e in table.collaborator_recs[source]:
                fh.write(
                    f'{{"source":{json.dumps(e.source_id)},"kind":"collaborator",'
                    f'"target":{json.dumps(e.target_id)},"score":{e.score:.6f},"rank":{e.rank}}}\n'
                )
        for source in sorted(table.dataset_user_recs):
            for e in table.dataset_user_recs[source]:
                fh.write(
                    f'{{"source":{json.dumps(e.source_id)},"kind":"dataset_user",'
                    f'"target":{json.dumps(e.target_id)},"score":{e.score:.6f},"rank":{e.rank}}}\n'
                )


def read_recommendations(path: str | Path) -> RecommendationTable:
    table = RecommendationTable()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            entry = RecommendationEntry(obj["source"], obj["target"], float(obj["score"]), int(obj["rank"]))
            bucket = table.collaborator_recs if obj["kind"] == "collaborator" else table.dataset_user_recs
            bucket.setdefault(entry.source_id, []).append(entry)
    for recs in table.collaborator_recs.values():
        recs.sort(key=lambda e: e.rank)
    for recs in table.dataset_user_recs.values():
        recs.sort(key=lambda e: e.rank)
    return table
