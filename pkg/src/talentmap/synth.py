"""Deterministic synthetic corpus generator for benchmarks and the e2e test.

Produces the record files and per-paper embeddings the pipeline consumes:
clustered topics, byline sizes and citation counts with realistic spread, a
small share of inactive authors that the ingest filter must drop.
"""

from __future__ import annotations

from pathlib import Path

import json

import numpy as np

from .embeddings import write_embeddings

FIRST = ["Wei", "Maria", "John", "Aiko", "Lena", "Omar", "Priya", "Igor", "Sara", "Tom",
         "Nadia", "Chen", "Lucas", "Amara", "Jonas", "Rosa", "Karl", "Mina", "Paul", "Zoe"]
LAST = ["Zhang", "Garcia", "Smith", "Tanaka", "Fischer", "Hassan", "Patel", "Volkov",
        "Rossi", "Baker", "Novak", "Liu", "Silva", "Okafor", "Berg", "Moreau", "Weber",
        "Kim", "Dubois", "Costa"]
TOPICS = ["cell imaging", "protein folding", "genome screening", "drug response",
          "neural circuits", "immune profiling", "tissue atlases", "pathway modeling"]


def make_synthetic_corpus(
    out_dir: str | Path,
    n_authors: int = 5600,
    n_datasets: int = 60,
    papers_per_author: float = 2.2,
    dim: int = 16,
    n_clusters: int = 8,
    inactive_share: float = 0.05,
    seed: int = 20240601,
) -> dict:
    """Write papers/authors/datasets jsonl plus embeddings.emb1 into out_dir.

    Returns summary counts. Fully deterministic for a given seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    author_ids = [f"a{i:05d}" for i in range(n_authors)]
    clusters = rng.integers(0, n_clusters, size=n_authors)
    inactive = rng.random(n_authors) < inactive_share
    is_core = rng.random(n_authors) < 0.01
    centers = rng.standard_normal((n_clusters, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)

    dataset_ids = [f"d{i:03d}" for i in range(n_datasets)]
    dataset_clusters = rng.integers(0, n_clusters, size=n_datasets)

    with open(out / "authors.jsonl", "w", encoding="utf-8") as fh:
        for i, aid in enumerate(author_ids):
            rec = {
                "id": aid,
                "name": f"{FIRST[int(rng.integers(len(FIRST)))]} {LAST[int(rng.integers(len(LAST)))]} {i}",
                "institution": f"Institute {int(clusters[i])}",
                "career_start_year": int(rng.integers(1980, 2020)),
                "is_core": bool(is_core[i]),
                "detail_url": f"https://example.org/profiles/{aid}",
            }
            fh.write(json.dumps(rec) + "\n")

    with open(out / "datasets.jsonl", "w", encoding="utf-8") as fh:
        for j, did in enumerate(dataset_ids):
            topic = TOPICS[int(dataset_clusters[j]) % len(TOPICS)]
            rec = {
                "id": did,
                "name": f"{topic.title()} Resource {j}",
                "description": f"A curated collection of {topic} measurements, release {j}.",
            }
            fh.write(json.dumps(rec) + "\n")

    n_papers = int(n_authors * papers_per_author)
    paper_ids = [f"p{i:06d}" for i in range(n_papers)]
    vectors = {}
    by_cluster = [np.flatnonzero(clusters == c) for c in range(n_clusters)]
    with open(out / "papers.jsonl", "w", encoding="utf-8") as fh:
        for k, pid in enumerate(paper_ids):
            c = int(rng.integers(n_clusters))
            members = by_cluster[c]
            n_byline = int(rng.integers(1, 6))
            byline_idx = rng.choice(members, size=min(n_byline, members.size), replace=False)
            # occasional cross-cluster collaborator
            if rng.random() < 0.15:
                byline_idx = np.append(byline_idx, rng.integers(n_authors))
            byline = list(dict.fromkeys(author_ids[int(i)] for i in byline_idx))
            # inactive authors publish only before the cutoff
            if any(inactive[int(i)] for i in byline_idx):
                year = int(rng.integers(2012, 2021))
            else:
                year = int(rng.integers(2017, 2025))
            used = []
            if rng.random() < 0.3:
                eligible = np.flatnonzero(dataset_clusters == c)
                if eligible.size:
                    used = [dataset_ids[int(rng.choice(eligible))]]
            topic = TOPICS[c % len(TOPICS)]
            rec = {
                "id": pid,
                "title": f"Advances in {topic}: study {k}",
                "abstract": f"We analyze {topic} with new methods ({k}).",
                "year": year,
                "journal": f"Journal of {topic.title()}",
                "citations": int(rng.pareto(1.5) * 10),
                "authors": byline,
                "datasets": used,
            }
            fh.write(json.dumps(rec) + "\n")
            vec = centers[c] + 0.25 * rng.standard_normal(dim)
            vectors[pid] = vec / np.linalg.norm(vec)

    write_embeddings(out / "embeddings.emb1", vectors)
    return {
        "authors": n_authors,
        "papers": n_papers,
        "datasets": n_datasets,
        "dim": dim,
        "inactive": int(inactive.sum()),
    }
