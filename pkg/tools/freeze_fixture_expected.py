"""Regenerate the fixture's expected-output file by brute-force enumeration.

Everything here is computed from the raw jsonl records with definitional
formulas only (no imports from the package), so the frozen file is an
independent oracle for the ingest, aggregation, and recommendation paths.

Usage: python tools/freeze_fixture_expected.py
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "data" / "talent_fixture"
CUTOFF_YEAR = 2020
K_COLLAB = 30
K_USERS = 150

# Per-paper vectors for the fixture, chosen for clean hand arithmetic.
PAPER_VECTORS = {
    "p1": [1.0, 0.0, 0.0, 0.0],
    "p2": [0.0, 1.0, 0.0, 0.0],
    "p3": [0.0, 0.0, 1.0, 0.0],
    "p4": [0.0, 0.0, 0.0, 1.0],
    "p5": [1.0, 1.0, 0.0, 0.0],
    "p6": [1.0, 0.0, 1.0, 0.0],
}


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def position_weight(pos, n):
    if pos == 1 or pos == n:
        return 1.0
    if pos <= 10:
        return 1.0 / pos
    return 0.1


def normalize(vec):
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


def cosine(u, v):
    num = sum(a * b for a, b in zip(u, v))
    return num / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))


def main():
    papers = read_jsonl(FIXTURE / "papers.jsonl")
    authors = read_jsonl(FIXTURE / "authors.jsonl")

    # activity filter: a paper after the cutoff, or the core flag
    active = {a["id"] for a in authors if a.get("is_core")}
    for p in papers:
        if p["year"] > CUTOFF_YEAR:
            active.update(p["authors"])
    retained = sorted(active & {a["id"] for a in authors})

    coauthors = {a: set() for a in retained}
    dataset_users = {}
    author_papers = {a: [] for a in retained}
    for p in sorted(papers, key=lambda p: p["id"]):
        on_paper = [a for a in p["authors"] if a in active]
        for a in on_paper:
            author_papers[a].append(p["id"])
            for b in on_paper:
                if a != b:
                    coauthors[a].add(b)
        for d in p["datasets"]:
            dataset_users.setdefault(d, set()).update(on_paper)

    # positional-weight aggregation, then L2 normalization
    author_vectors = {}
    for a in retained:
        total = [0.0, 0.0, 0.0, 0.0]
        any_vec = False
        for pid in author_papers[a]:
            paper = next(p for p in papers if p["id"] == pid)
            if pid not in PAPER_VECTORS:
                continue
            w = position_weight(paper["authors"].index(a) + 1, len(paper["authors"]))
            total = [t + w * x for t, x in zip(total, PAPER_VECTORS[pid])]
            any_vec = True
        if any_vec:
            author_vectors[a] = normalize(total)
    dataset_vectors = {}
    for d in sorted(dataset_users):
        used = [PAPER_VECTORS[p["id"]] for p in papers if d in p["datasets"] and p["id"] in PAPER_VECTORS]
        if used:
            mean = [sum(col) / len(used) for col in zip(*used)]
            dataset_vectors[d] = normalize(mean)

    def top_k(query_vec, excluded, k):
        scored = [
            (cid, cosine(query_vec, cvec))
            for cid, cvec in author_vectors.items()
            if cid not in excluded
        ]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return [
            {"target": cid, "score": f"{score:.6f}", "rank": r}
            for r, (cid, score) in enumerate(scored[:k], start=1)
        ]

    collaborator_recs = {
        a: top_k(author_vectors[a], coauthors[a] | {a}, K_COLLAB) for a in sorted(author_vectors)
    }
    dataset_user_recs = {
        d: top_k(dataset_vectors[d], dataset_users.get(d, set()), K_USERS)
        for d in sorted(dataset_vectors)
    }

    expected = {
        "retained_authors": retained,
        "removed_authors": sorted({a["id"] for a in authors} - set(retained)),
        "coauthor_index": {a: sorted(coauthors[a]) for a in retained},
        "dataset_user_index": {d: sorted(dataset_users[d]) for d in sorted(dataset_users)},
        "author_paper_index": author_papers,
        "publication_count": {a: len(author_papers[a]) for a in retained},
        "author_vectors": {a: [round(x, 12) for x in v] for a, v in author_vectors.items()},
        "dataset_vectors": {d: [round(x, 12) for x in v] for d, v in dataset_vectors.items()},
        "collaborator_recs": collaborator_recs,
        "dataset_user_recs": dataset_user_recs,
    }
    out = FIXTURE / "expected.json"
    out.write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")

    # the per-paper embedding input artifact, written with raw struct calls
    emb = FIXTURE / "embeddings.emb1"
    with open(emb, "wb") as fh:
        fh.write(b"EMB1")
        fh.write(struct.pack("<IQ", 4, len(PAPER_VECTORS)))
        for pid, vec in PAPER_VECTORS.items():
            raw = pid.encode()
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<4f", *vec))
    print(f"wrote {emb}")


if __name__ == "__main__":
    main()
