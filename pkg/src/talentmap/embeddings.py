"""Per-paper embedding vectors and their aggregation into author/dataset vectors.

Authors are weighted sums of their papers' vectors, with the weight set by
byline position (first and last authors count fully, middle authors decay as
1/k down to a 1/10 floor). Datasets are plain means over the papers that used
them. Every aggregate is L2-normalized, so downstream cosine similarity
reduces to a dot product.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import CorpusSnapshot

EMB1_MAGIC = b"EMB1"
ZERO_NORM_EPS = 1e-12


class EmbeddingError(ValueError):
    """Raised on malformed embedding files or invalid vectors."""


def position_weight(position: int, byline_length: int) -> float:
    """Contribution weight of the author at 1-based `position` on a byline of
    `byline_length` authors.

    First and last authors always weigh 1; a k-th middle author weighs 1/k,
    floored at 1/10 beyond the 10th position.
    """
    if byline_length < 1:
        raise ValueError(f"byline_length must be >= 1, got {byline_length}")
    if not 1 <= position <= byline_length:
        raise ValueError(f"position {position} out of range 1..{byline_length}")
    if position == 1 or position == byline_length:
        return 1.0
    if position <= 10:
        return 1.0 / position
    return 0.1


def _normalize(vec: np.ndarray) -> np.ndarray | None:
    norm = float(np.linalg.norm(vec))
    if norm < ZERO_NORM_EPS:
        return None
    return vec / norm


@dataclass
class EmbeddingStore:
    """Frozen after aggregation; safe for concurrent reads."""

    dimension: int
    paper_vectors: dict[str, np.ndarray] = field(default_factory=dict)
    author_vectors: dict[str, np.ndarray] = field(default_factory=dict)
    dataset_vectors: dict[str, np.ndarray] = field(default_factory=dict)


def aggregate_author_embedding(
    author_id: str, snapshot: CorpusSnapshot, store: EmbeddingStore
) -> np.ndarray | None:
    """Position-weighted sum of the author's paper vectors, L2-normalized.

    Returns None when the author has no embedded papers (zero-evidence rule)
    or the weighted sum is numerically zero.
    """
    if author_id not in snapshot.authors:
        raise KeyError(f"unknown author id {author_id!r}")
    total = np.zeros(store.dimension, dtype=np.float64)
    seen = False
    for pid in snapshot.author_paper_index.get(author_id, ()):
        vec = store.paper_vectors.get(pid)
        if vec is None:
            continue
        byline = snapshot.papers[pid].author_ids
        pos = byline.index(author_id) + 1
        total += position_weight(pos, len(byline)) * vec
        seen = True
    if not seen:
        return None
    return _normalize(total)


def aggregate_dataset_embedding(
    dataset_id: str, snapshot: CorpusSnapshot, store: EmbeddingStore
) -> np.ndarray | None:
    """Unweighted mean of the vectors of papers that used the dataset, normalized."""
    if dataset_id not in snapshot.datasets:
        raise KeyError(f"unknown dataset id {dataset_id!r}")
    vecs = [
        store.paper_vectors[pid]
        for pid, paper in snapshot.papers.items()
        if dataset_id in paper.dataset_ids and pid in store.paper_vectors
    ]
    if not vecs:
        return None
    return _normalize(np.mean(vecs, axis=0))


def aggregate_all(snapshot: CorpusSnapshot, store: EmbeddingStore) -> EmbeddingStore:
    """Fill author and dataset vectors for every retained entity with evidence."""
    for aid in snapshot.authors:
        vec = aggregate_author_embedding(aid, snapshot, store)
        if vec is not None:
            store.author_vectors[aid] = vec
    # Group papers by dataset once instead of scanning all papers per dataset.
    by_dataset: dict[str, list[np.ndarray]] = {}
    for pid, paper in snapshot.papers.items():
        vec = store.paper_vectors.get(pid)
        if vec is None:
            continue
        for did in paper.dataset_ids:
            by_dataset.setdefault(did, []).append(vec)
    for did in snapshot.datasets:
        vecs = by_dataset.get(did)
        if not vecs:
            continue
        vec = _normalize(np.mean(vecs, axis=0))
        if vec is not None:
            store.dataset_vectors[did] = vec
    return store


def write_embeddings(path: str | Path, vectors: Mapping[str, np.ndarray] | Iterable[tuple[str, np.ndarray]]) -> None:
    """Write id->vector pairs in the EMB1 binary format.

    Layout: magic "EMB1", u32 LE dimension, u64 LE record count, then per
    record a u16 LE id byte-length, the UTF-8 id bytes, and dimension
    float32 LE values.
    """
    items = list(vectors.items()) if isinstance(vectors, Mapping) else list(vectors)
    if not items:
        raise EmbeddingError("refusing to write an empty embedding file")
    dim = len(items[0][1])
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<IQ", dim, len(items)))
        for vid, vec in items:
            arr = np.asarray(vec, dtype=np.float32)
            if arr.shape != (dim,):
                raise EmbeddingError(f"record {vid!r}: dimension {arr.shape} != header {dim}")
            if not np.all(np.isfinite(arr)):
                raise EmbeddingError(f"record {vid!r}: non-finite component")
            id_bytes = vid.encode("utf-8")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(arr.tobytes())


def read_embeddings(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    """Read an EMB1 file; returns (dimension, id -> float32 vector).

    Fails loudly: bad magic, truncated records (with byte offset), and
    non-finite values are all errors.
    """
    data = Path(path).read_bytes()
    if data[:4] != EMB1_MAGIC:
        raise EmbeddingError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 16:
        raise EmbeddingError(f"{path}: truncated header")
    dim, count = struct.unpack_from("<IQ", data, 4)
    offset = 16
    vec_bytes = 4 * dim
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        if offset + 2 > len(data):
            raise EmbeddingError(f"{path}: truncated record header at byte {offset}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + vec_bytes > len(data):
            raise EmbeddingError(f"{path}: truncated record at byte {offset}")
        vid = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data[offset : offset + vec_bytes], dtype="<f4").copy()
        offset += vec_bytes
        if not np.all(np.isfinite(vec)):
            raise EmbeddingError(f"{path}: record {vid!r} has a non-finite component")
        if vid in out:
            raise EmbeddingError(f"{path}: duplicate record id {vid!r}")
        out[vid] = vec
    return int(dim), out


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load per-paper vectors from an EMB1 file into a fresh store."""
    dim, vectors = read_embeddings(path)
    return EmbeddingStore(dimension=dim, paper_vectors={k: v.astype(np.float64) for k, v in vectors.items()})
