"""Corpus ingestion: parse record files, apply the activity filter, build indexes.

The snapshot produced here is the single source of truth for every later
pipeline stage. Loading is strict: any malformed line, duplicate id, or
dangling reference aborts with a `CorpusError` naming the offender, so the
indexes downstream code reads can be trusted unconditionally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence


class CorpusError(ValueError):
    """Raised when record files are malformed or referentially inconsistent."""


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    year: int
    journal: str
    citation_count: int
    author_ids: tuple[str, ...]  # byline order
    dataset_ids: frozenset[str]

    def __post_init__(self) -> None:
        if not self.author_ids:
            raise CorpusError(f"paper {self.paper_id!r}: empty author list")
        if len(set(self.author_ids)) != len(self.author_ids):
            raise CorpusError(f"paper {self.paper_id!r}: duplicate author id in byline")
        if self.citation_count < 0:
            raise CorpusError(f"paper {self.paper_id!r}: negative citation count")
        if not 1900 <= self.year <= 2100:
            raise CorpusError(f"paper {self.paper_id!r}: year {self.year} out of range")


@dataclass(frozen=True)
class AuthorRecord:
    author_id: str
    display_name: str
    institution: str = ""
    career_start_year: int | None = None
    is_core: bool = False
    detail_url: str | None = None


@dataclass(frozen=True)
class DatasetRecord:
    dataset_id: str
    name: str
    description: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise CorpusError(f"dataset {self.dataset_id!r}: empty name")


@dataclass(frozen=True)
class CorpusSnapshot:
    """Immutable, fully indexed corpus. Safe for unlimited concurrent readers.

    `authors` contains only retained (active or core) authors; papers keep
    their full bylines so positional weights are unaffected by filtering.
    All index values reference retained ids only.
    """

    papers: Mapping[str, PaperRecord]
    authors: Mapping[str, AuthorRecord]
    datasets: Mapping[str, DatasetRecord]
    coauthor_index: Mapping[str, frozenset[str]]
    dataset_user_index: Mapping[str, frozenset[str]]
    author_paper_index: Mapping[str, tuple[str, ...]]
    publication_count: Mapping[str, int]
    activity_cutoff_year: int = 2020
    removed_author_ids: frozenset[str] = field(default_factory=frozenset)


def _parse_paper(obj: dict) -> PaperRecord:
    return PaperRecord(
        paper_id=str(obj["id"]),
        title=str(obj["title"]),
        abstract=str(obj.get("abstract", "") or ""),
        year=int(obj["year"]),
        journal=str(obj.get("journal", "") or ""),
        citation_count=int(obj["citations"]),
        author_ids=tuple(str(a) for a in obj["authors"]),
        dataset_ids=frozenset(str(d) for d in obj.get("datasets", [])),
    )


def _parse_author(obj: dict) -> AuthorRecord:
    start = obj.get("career_start_year")
    return AuthorRecord(
        author_id=str(obj["id"]),
        display_name=str(obj["name"]),
        institution=str(obj.get("institution", "") or ""),
        career_start_year=int(start) if start is not None else None,
        is_core=bool(obj.get("is_core", False)),
        detail_url=obj.get("detail_url"),
    )


def _parse_dataset(obj: dict) -> DatasetRecord:
    return DatasetRecord(
        dataset_id=str(obj["id"]),
        name=str(obj["name"]),
        description=str(obj.get("description", "") or ""),
    )


def _read_jsonl(path: str | Path, parse, what: str) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(parse(obj))
            except CorpusError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed {what} record: {exc}") from exc
    return records


def build_snapshot(
    papers: Iterable[PaperRecord],
    authors: Iterable[AuthorRecord],
    datasets: Iterable[DatasetRecord],
    activity_cutoff_year: int = 2020,
) -> CorpusSnapshot:
    """Validate records, apply the activity filter, and build all indexes.

    An author is retained iff they have at least one paper with
    year > activity_cutoff_year, or carry the core flag. Filtered authors
    stay in paper bylines (weights depend on position) but get no profile,
    no index entries, and no recommendation candidacy.
    """
    paper_map: dict[str, PaperRecord] = {}
    for p in papers:
        if p.paper_id in paper_map:
            raise CorpusError(f"duplicate paper id {p.paper_id!r}")
        paper_map[p.paper_id] = p
    author_map: dict[str, AuthorRecord] = {}
    for a in authors:
        if a.author_id in author_map:
            raise CorpusError(f"duplicate author id {a.author_id!r}")
        author_map[a.author_id] = a
    dataset_map: dict[str, DatasetRecord] = {}
    for d in datasets:
        if d.dataset_id in dataset_map:
            raise CorpusError(f"duplicate dataset id {d.dataset_id!r}")
        dataset_map[d.dataset_id] = d

    for p in paper_map.values():
        for ds in p.dataset_ids:
            if ds not in dataset_map:
                raise CorpusError(f"paper {p.paper_id!r}: unknown dataset id {ds!r}")
        for au in p.author_ids:
            if au not in author_map:
                raise CorpusError(f"paper {p.paper_id!r}: unknown author id {au!r}")

    active: set[str] = {a.author_id for a in author_map.values() if a.is_core}
    for p in paper_map.values():
        if p.year > activity_cutoff_year:
            active.update(p.author_ids)
    retained = {aid: rec for aid, rec in author_map.items() if aid in active}
    removed = frozenset(author_map) - frozenset(retained)

    author_papers: dict[str, list[str]] = {aid: [] for aid in retained}
    coauthors: dict[str, set[str]] = {aid: set() for aid in retained}
    dataset_users: dict[str, set[str]] = {did: set() for did in dataset_map}
    for pid in sorted(paper_map):
        p = paper_map[pid]
        on_paper = [aid for aid in p.author_ids if aid in retained]
        for aid in on_paper:
            author_papers[aid].append(pid)
            for other in on_paper:
                if other != aid:
                    coauthors[aid].add(other)
        for did in p.dataset_ids:
            dataset_users[did].update(on_paper)

    return CorpusSnapshot(
        papers=MappingProxyType(paper_map),
        authors=MappingProxyType(retained),
        datasets=MappingProxyType(dataset_map),
        coauthor_index=MappingProxyType({a: frozenset(s) for a, s in coauthors.items()}),
        dataset_user_index=MappingProxyType({d: frozenset(s) for d, s in dataset_users.items()}),
        author_paper_index=MappingProxyType({a: tuple(ps) for a, ps in author_papers.items()}),
        publication_count=MappingProxyType({a: len(ps) for a, ps in author_papers.items()}),
        activity_cutoff_year=activity_cutoff_year,
        removed_author_ids=removed,
    )


def load_corpus(
    papers_path: str | Path,
    authors_path: str | Path,
    datasets_path: str | Path,
    activity_cutoff_year: int = 2020,
) -> CorpusSnapshot:
    """Load the three line-delimited record files into a snapshot."""
    papers = _read_jsonl(papers_path, _parse_paper, "paper")
    authors = _read_jsonl(authors_path, _parse_author, "author")
    datasets = _read_jsonl(datasets_path, _parse_dataset, "dataset")
    return build_snapshot(papers, authors, datasets, activity_cutoff_year)


def validate_snapshot(snapshot: CorpusSnapshot) -> list[str]:
    """Return a description of every violated snapshot invariant (empty = healthy)."""
    violations: list[str] = []
    authors = snapshot.authors
    for aid, coset in snapshot.coauthor_index.items():
        if aid not in authors:
            violations.append(f"coauthor_index key {aid!r} is not a retained author")
        if aid in coset:
            violations.append(f"coauthor_index[{aid!r}] contains the author itself")
        for other in coset:
            if other not in authors:
                violations.append(f"coauthor_index[{aid!r}] references unknown author {other!r}")
            elif aid not in snapshot.coauthor_index.get(other, frozenset()):
                violations.append(f"asymmetric coauthor edge: {other!r} missing {aid!r}")
    for did, users in snapshot.dataset_user_index.items():
        if did not in snapshot.datasets:
            violations.append(f"dataset_user_index key {did!r} is not a known dataset")
        for aid in users:
            if aid not in authors:
                violations.append(f"dataset_user_index[{did!r}] references unknown author {aid!r}")
    for pid, paper in snapshot.papers.items():
        for did in paper.dataset_ids:
            if did not in snapshot.datasets:
                violations.append(f"paper {pid!r} references unknown dataset {did!r}")
    for aid, pids in snapshot.author_paper_index.items():
        if aid not in authors:
            violations.append(f"author_paper_index key {aid!r} is not a retained author")
        for pid in pids:
            if pid not in snapshot.papers:
                violations.append(f"author_paper_index[{aid!r}] references unknown paper {pid!r}")
        if snapshot.publication_count.get(aid) != len(pids):
            violations.append(f"publication_count[{aid!r}] != |author_paper_index[{aid!r}]|")
    for aid in authors:
        if aid not in snapshot.author_paper_index:
            violations.append(f"retained author {aid!r} missing from author_paper_index")
    return violations


def snapshot_to_json(snapshot: CorpusSnapshot) -> str:
    """Canonical JSON serialization; identical inputs serialize byte-identically."""
    doc = {
        "activity_cutoff_year": snapshot.activity_cutoff_year,
        "papers": {
            pid: {
                "title": p.title,
                "abstract": p.abstract,
                "year": p.year,
                "journal": p.journal,
                "citations": p.citation_count,
                "authors": list(p.author_ids),
                "datasets": sorted(p.dataset_ids),
            }
            for pid, p in sorted(snapshot.papers.items())
        },
        "authors": {
            aid: {
                "name": a.display_name,
                "institution": a.institution,
                "career_start_year": a.career_start_year,
                "is_core": a.is_core,
                "detail_url": a.detail_url,
            }
            for aid, a in sorted(snapshot.authors.items())
        },
        "datasets": {
            did: {"name": d.name, "description": d.description}
            for did, d in sorted(snapshot.datasets.items())
        },
        "removed_author_ids": sorted(snapshot.removed_author_ids),
    }
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def snapshot_from_json(text: str) -> CorpusSnapshot:
    doc = json.loads(text)
    papers = [
        PaperRecord(
            paper_id=pid,
            title=p["title"],
            abstract=p["abstract"],
            year=p["year"],
            journal=p["journal"],
            citation_count=p["citations"],
            author_ids=tuple(p["authors"]),
            dataset_ids=frozenset(p["datasets"]),
        )
        for pid, p in doc["papers"].items()
    ]
    authors = [
        AuthorRecord(
            author_id=aid,
            display_name=a["name"],
            institution=a["institution"],
            career_start_year=a["career_start_year"],
            is_core=a["is_core"],
            detail_url=a["detail_url"],
        )
        for aid, a in doc["authors"].items()
    ]
    # Removed authors are reconstructed as bare records so bylines stay resolvable.
    removed = [AuthorRecord(author_id=aid, display_name=aid) for aid in doc["removed_author_ids"]]
    datasets = [
        DatasetRecord(dataset_id=did, name=d["name"], description=d["description"])
        for did, d in doc["datasets"].items()
    ]
    return build_snapshot(
        papers, authors + removed, datasets, doc["activity_cutoff_year"]
    )


def save_snapshot(snapshot: CorpusSnapshot, path: str | Path) -> None:
    Path(path).write_text(snapshot_to_json(snapshot), encoding="utf-8")


def load_snapshot(path: str | Path) -> CorpusSnapshot:
    return snapshot_from_json(Path(path).read_text(encoding="utf-8"))
