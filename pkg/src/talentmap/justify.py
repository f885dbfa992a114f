"""Evidence-grounded justification prompts, provider calls, and the cache.

Justifications are generated lazily: the first request for a (kind, source,
target) key builds a prompt from both sides' best recent work, calls the chat
provider once, and persists the answer. Concurrent duplicates share a single
upstream call, and the mock provider makes the whole path runnable offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests

from .corpus import CorpusSnapshot, DatasetRecord, PaperRecord

EVIDENCE_MIN_YEAR = 2017
EVIDENCE_COUNT = 5
PROMPT_WORD_CAP = 180

ENV_API_KEY = "CM_LLM_API_KEY"
ENV_ENDPOINT = "CM_LLM_ENDPOINT"


class ProviderError(RuntimeError):
    retriable = False


class ProviderAuthError(ProviderError):
    """Credential rejected; retrying cannot help."""


class ProviderRetriableError(ProviderError):
    """Timeouts and server-side failures that survived all retry attempts."""

    retriable = True


class ProviderResponseError(ProviderError):
    """Provider answered, but not in the shape the config promised."""


class JustificationQueueFull(RuntimeError):
    """Too many requests already waiting on the provider concurrency limit."""


@dataclass(frozen=True)
class EvidenceBundle:
    author_id: str
    recent_papers: tuple[PaperRecord, ...]
    cited_papers: tuple[PaperRecord, ...]

    def all_papers(self) -> tuple[PaperRecord, ...]:
        return self.recent_papers + self.cited_papers

    def is_empty(self) -> bool:
        return not (self.recent_papers or self.cited_papers)


def select_evidence(author_id: str, snapshot: CorpusSnapshot) -> EvidenceBundle:
    """The author's five most recent and five most-cited papers since 2017.

    Overlap resolves in favor of "recent"; "cited" backfills from the next
    most-cited papers so the union stays duplicate-free.
    """
    if author_id not in snapshot.authors:
        raise KeyError(f"unknown author id {author_id!r}")
    pool = [
        snapshot.papers[pid]
        for pid in snapshot.author_paper_index.get(author_id, ())
        if snapshot.papers[pid].year >= EVIDENCE_MIN_YEAR
    ]
    recent = sorted(pool, key=lambda p: (-p.year, -p.citation_count, p.paper_id))[:EVIDENCE_COUNT]
    taken = {p.paper_id for p in recent}
    cited = [
        p
        for p in sorted(pool, key=lambda p: (-p.citation_count, -p.year, p.paper_id))
        if p.paper_id not in taken
    ][:EVIDENCE_COUNT]
    return EvidenceBundle(author_id, tuple(recent), tuple(cited))


def _format_paper(p: PaperRecord) -> str:
    journal = p.journal or "unpublished venue"
    return f'- "{p.title}" ({journal}, {p.year}; {p.citation_count} citations)'


def _format_bundle(name: str, bundle: EvidenceBundle) -> str:
    lines = [f"Papers by {name}:"]
    seen: set[str] = set()
    for p in bundle.all_papers():
        if p.paper_id in seen:
            continue
        seen.add(p.paper_id)
        lines.append(_format_paper(p))
    return "\n".join(lines)


def build_collaborator_prompt(
    source: EvidenceBundle, target: EvidenceBundle,
    source_name: str | None = None, target_name: str | None = None,
) -> str:
    """Deterministic prompt asking why `target` is a promising new collaborator."""
    if source.is_empty():
        raise ValueError(f"source bundle for {source.author_id!r} is empty")
    if target.is_empty():
        raise ValueError(f"target bundle for {target.author_id!r} is empty")
    source_name = source_name or source.author_id
    target_name = target_name or target.author_id
    return (
        f"You are advising the researcher {source_name}. Explain why {target_name}, "
        f"with whom they have never collaborated, would be a promising new collaborator.\n\n"
        f"{_format_bundle(source_name, source)}\n\n"
        f"{_format_bundle(target_name, target)}\n\n"
        "Ground every claim only in the papers listed above; do not invent publications "
        f"or facts. Answer in at most {PROMPT_WORD_CAP} words."
    )


def build_dataset_user_prompt(
    author: EvidenceBundle, dataset: DatasetRecord, author_name: str | None = None
) -> str:
    """Deterministic prompt asking why the author should consider the dataset."""
    if author.is_empty():
        raise ValueError(f"author bundle for {author.author_id!r} is empty")
    author_name = author_name or author.author_id
    description = f"Description: {dataset.description}\n" if dataset.description else ""
    return (
        f"You are advising the researcher {author_name}. Explain why the dataset "
        f'"{dataset.name}", which they have not used before, could benefit their research.\n\n'
        f'Dataset: {dataset.name}\n{description}\n'
        f"{_format_bundle(author_name, author)}\n\n"
        "Ground every claim only in the dataset description and the papers listed above; "
        f"do not invent facts. Answer in at most {PROMPT_WORD_CAP} words."
    )


@dataclass(frozen=True)
class JustificationKey:
    kind: str  # "collaborator" | "dataset_user"
    source_id: str
    target_id: str


@dataclass
class JustificationRecord:
    key: JustificationKey
    text: str
    model_id: str
    created_at: float
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass
class ProviderConfig:
    endpoint: str = ""
    api_key: str = ""
    model_id: str = "mock-model"
    timeout: float = 30.0
    max_attempts: int = 3
    backoff_base: float = 1.0
    backoff_jitter: float = 0.1
    # dotted path into the response JSON; list indices are numeric segments
    response_text_path: str = "choices.0.message.content"
    mock: bool = False

    @classmethod
    def from_env(cls, mock: bool = False) -> "ProviderConfig":
        return cls(
            endpoint=os.environ.get(ENV_ENDPOINT, ""),
            api_key=os.environ.get(ENV_API_KEY, ""),
            mock=mock,
        )


def _dig(doc, path: str):
    cur = doc
    for seg in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(seg)]
        elif isinstance(cur, dict):
            cur = cur[seg]
        else:
            raise KeyError(seg)
    return cur


class MockChatProvider:
    """Offline provider: stable text derived from the prompt's request key."""

    model_id = "mock-model"

    def __init__(self, config: ProviderConfig | None = None):
        self.calls = 0

    def complete(self, key: JustificationKey, prompt: str) -> tuple[str, int, int]:
        self.calls += 1
        digest = hashlib.sha256(f"{key.kind}|{key.source_id}|{key.target_id}".encode()).hexdigest()[:12]
        noun = "collaboration" if key.kind == "collaborator" else "dataset adoption"
        text = (
            f"[mock justification {digest}] Based on the listed evidence, {key.target_id} "
            f"shows strong topical alignment with {key.source_id}, making this {noun} promising."
        )
        return text, len(prompt.split()), len(text.split())


class HttpChatProvider:
    """Chat-completion client for any endpoint speaking the messages format."""

    def __init__(self, config: ProviderConfig, sleep: Callable[[float], None] = time.sleep):
        if not config.endpoint:
            raise ValueError(f"no provider endpoint configured (set {ENV_ENDPOINT} or use the mock)")
        self.config = config
        self.model_id = config.model_id
        self._sleep = sleep
        self._rng = random.Random(0xC0FFEE)

    def complete(self, key: JustificationKey, prompt: str) -> tuple[str, int, int]:
        cfg = self.config
        body = {"model": cfg.model_id, "messages": [{"role": "user", "content": prompt}]}
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        last_error: Exception | None = None
        for attempt in range(cfg.max_attempts):
            if attempt:
                delay = cfg.backoff_base * (2 ** (attempt - 1))
                self._sleep(delay + self._rng.uniform(0, cfg.backoff_jitter))
            try:
                resp = requests.post(cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in (401, 403):
                raise ProviderAuthError(f"provider rejected credentials (HTTP {resp.status_code})")
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = ProviderRetriableError(f"provider returned HTTP {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProviderResponseError(f"unexpected HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                doc = resp.json()
                text = _dig(doc, cfg.response_text_path)
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderResponseError(f"malformed provider response: {exc}") from exc
            if not isinstance(text, str) or not text.strip():
                raise ProviderResponseError("provider response contained no text")
            usage = doc.get("usage", {}) if isinstance(doc, dict) else {}
            return text, int(usage.get("prompt_tokens", 0)), int(usage.get("completion_tokens", 0))
        raise ProviderRetriableError(
            f"provider failed after {cfg.max_attempts} attempts: {last_error}"
        )


def make_provider(config: ProviderConfig, sleep: Callable[[float], None] = time.sleep):
    return MockChatProvider(config) if config.mock else HttpChatProvider(config, sleep)


class JustificationCache:
    """Append-only jsonl cache; the newest line wins for a repeated key."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._records: dict[JustificationKey, JustificationRecord] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                key = JustificationKey(obj["kind"], obj["source"], obj["target"])
                self._records[key] = JustificationRecord(
                    key=key,
                    text=obj["text"],
                    model_id=obj["model"],
                    created_at=float(obj["created_at"]),
                )

    def get(self, key: JustificationKey) -> JustificationRecord | None:
        return self._records.get(key)

    def put(self, record: JustificationRecord) -> None:
        with self._lock:
            self._records[record.key] = record
            if self.path is not None:
                line = json.dumps(
                    {
                        "kind": record.key.kind,
                        "source": record.key.source_id,
                        "target": record.key.target_id,
                        "text": record.text,
                        "model": record.model_id,
                        "created_at": record.created_at,
                    },
                    ensure_ascii=False,
                )
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")

    def __len__(self) -> int:
        return len(self._records)


class JustificationService:
    """Single-flight fetch over the cache with a provider concurrency limit."""

    def __init__(
        self,
        provider,
        cache: JustificationCache,
        max_concurrent: int = 4,
        max_waiting: int = 32,
        clock: Callable[[], float] = time.time,
    ):
        self.provider = provider
        self.cache = cache
        self._clock = clock
        self._lock = threading.Lock()
        self._inflight: dict[JustificationKey, threading.Event] = {}
        self._failures: dict[JustificationKey, Exception] = {}
        self._slots = threading.Semaphore(max_concurrent)
        self._max_waiting = max_waiting
        self._waiting = 0

    def fetch(self, key: JustificationKey, prompt: str) -> tuple[JustificationRecord, bool]:
        """Return (record, cache_hit). Exactly one upstream call happens per
        key no matter how many callers arrive concurrently; failures are
        propagated to every waiter and never cached."""
        cached = self.cache.get(key)
        if cached is not None:
            return cached, True
        with self._lock:
            cached = self.cache.get(key)
            if cached is not None:
                return cached, True
            event = self._inflight.get(key)
            if event is None:
                event = threading.Event()
                self._inflight[key] = event
                self._failures.pop(key, None)  # a fresh attempt clears stale failures
                leader = True
            else:
                leader = False
        if not leader:
            event.wait()
            # the leader populates the cache before waking waiters
            cached = self.cache.get(key)
            if cached is not None:
                return cached, False
            failure = self._failures.get(key)
            if failure is not None:
                raise failure
            raise ProviderRetriableError("justification request was abandoned")
        try:
            with self._lock:
                if self._waiting >= self._max_waiting:
                    raise JustificationQueueFull(
                        f"more than {self._max_waiting} requests waiting on the provider"
                    )
                self._waiting += 1
            try:
                self._slots.acquire()
                try:
                    text, p_tokens, c_tokens = self.provider.complete(key, prompt)
                finally:
                    self._slots.release()
            finally:
                with self._lock:
                    self._waiting -= 1
            record = JustificationRecord(
                key=key,
                text=text,
                model_id=self.provider.model_id,
                created_at=self._clock(),
                prompt_tokens=p_tokens,
                completion_tokens=c_tokens,
            )
            self.cache.put(record)
            return record, False
        except Exception as exc:
            self._failures[key] = exc
            raise
        finally:
            event.set()
            with self._lock:
                self._inflight.pop(key, None)
