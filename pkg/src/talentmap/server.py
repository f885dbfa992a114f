"""Read-only HTTP JSON API over the finished pipeline artifacts.

Every route is a thin adapter over exactly one module operation; the server
owns no business logic. All heavy state is loaded once at startup into an
immutable AppState, so reads never contend; the justification path is the
single mutable subsystem and hides behind the gateway's synchronized cache.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from . import spatial
from .corpus import CorpusSnapshot, load_snapshot
from .justify import (
    JustificationCache,
    JustificationKey,
    JustificationQueueFull,
    JustificationService,
    ProviderConfig,
    ProviderError,
    build_collaborator_prompt,
    build_dataset_user_prompt,
    make_provider,
    select_evidence,
)
from .layout.formats import LayoutRecord, read_layout
from .recommend import RecommendationTable, read_recommendations

DEFAULT_VIEWPORT_CAP = 5000


class StartupError(RuntimeError):
    """An artifact is missing, corrupt, or inconsistent with the snapshot."""


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: Path = Path(".")
    viewport_cap: int = DEFAULT_VIEWPORT_CAP
    cors_origins: list[str] = field(default_factory=list)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    justify_max_concurrent: int = 4
    justify_max_waiting: int = 32
    static_dir: Path | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} out of range")


def canonical_json(payload: Any) -> bytes:
    """The one JSON encoder every route uses, so payloads are byte-stable."""
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _round6(value: float) -> float:
    return float(f"{value:.6f}")


class AppState:
    """Everything the routes read; immutable once constructed."""

    def __init__(
        self,
        snapshot: CorpusSnapshot,
        layout_records: list[LayoutRecord],
        recommendations: RecommendationTable,
        justifications: JustificationService,
    ):
        self.snapshot = snapshot
        self.recommendations = recommendations
        self.justifications = justifications
        self.layout_records = layout_records
        self._check_consistency()
        names = {}
        for rec in layout_records:
            if rec.node_kind == "talent":
                names[rec.node_id] = snapshot.authors[rec.node_id].display_name
            else:
                names[rec.node_id] = snapshot.datasets[rec.node_id].name
        self.names = names
        self.points = [
            spatial.LayoutPoint(
                node_id=rec.node_id,
                x=rec.x,
                y=rec.y,
                node_kind=rec.node_kind,
                display_size=rec.display_size,
                importance=rec.display_size,
            )
            for rec in layout_records
        ]
        self.tree = spatial.build_quadtree(self.points)
        self.layout_ids = frozenset(p.node_id for p in self.points)
        self.point_by_id = {p.node_id: p for p in self.points}
        self.search_index = spatial.SearchIndex(
            (p.node_id, self.names[p.node_id], p.node_kind) for p in self.points
        )

    def _check_consistency(self) -> None:
        offenders = []
        for rec in self.layout_records:
            known = (
                rec.node_id in self.snapshot.authors
                if rec.node_kind == "talent"
                else rec.node_id in self.snapshot.datasets
            )
            if not known:
                offenders.append(f"{rec.node_kind}:{rec.node_id}")
                if len(offenders) >= 20:
                    break
        if offenders:
            raise StartupError(
                f"layout references ids missing from the snapshot: {', '.join(offenders)}"
            )

    @classmethod
    def load(cls, config: ServerConfig) -> "AppState":
        data_dir = Path(config.data_dir)
        if not data_dir.is_dir():
            raise StartupError(f"data directory {data_dir} does not exist")
        required = {
            "snapshot": data_dir / "snapshot.json",
            "layout": data_dir / "layout.lay1",
            "recommendations": data_dir / "recommendations.jsonl",
        }
        for label, path in required.items():
            if not path.exists():
                raise StartupError(f"missing {label} artifact: {path}")
        try:
            snapshot = load_snapshot(required["snapshot"])
        except Exception as exc:
            raise StartupError(f"corrupt snapshot {required['snapshot']}: {exc}") from exc
        try:
            layout_records = read_layout(required["layout"])
        except Exception as exc:
            raise StartupError(f"corrupt layout {required['layout']}: {exc}") from exc
        try:
            recommendations = read_recommendations(required["recommendations"])
        except Exception as exc:
            raise StartupError(
                f"corrupt recommendations {required['recommendations']}: {exc}"
            ) from exc
        cache = JustificationCache(data_dir / "justifications.jsonl")
        service = JustificationService(
            make_provider(config.provider),
            cache,
            max_concurrent=config.justify_max_concurrent,
            max_waiting=config.justify_max_waiting,
        )
        return cls(snapshot, layout_records, recommendations, service)


def _error(status: int, message: str, **extra: Any) -> Response:
    payload = {"error": message, **extra}
    return Response(content=canonical_json(payload), status_code=status, media_type="application/json")


def serialize_viewport(points: list[spatial.LayoutPoint], names: dict[str, str]) -> dict:
    return {
        "points": [
            {
                "id": p.node_id,
                "name": names.get(p.node_id, p.node_id),
                "kind": p.node_kind,
                "x": _round6(p.x),
                "y": _round6(p.y),
                "size": _round6(p.display_size),
            }
            for p in points
        ]
    }


def build_app(state: AppState, config: ServerConfig) -> FastAPI:
    app = FastAPI(title="talentmap", docs_url=None, redoc_url=None)
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def malformed_query(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed request: {exc.errors()[0].get('loc')}")

    def ok(payload: Any, headers: dict[str, str] | None = None) -> Response:
        return Response(
            content=canonical_json(payload), media_type="application/json", headers=headers
        )

    @app.get("/healthz")
    def healthz() -> Response:
        return ok({"status": "ok", "nodes": len(state.points)})

    @app.get("/api/search")
    def search(q: str = "", kind: str | None = None, limit: int = 10, offset: int = 0) -> Response:
        if kind not in (None, "talent", "dataset"):
            return _error(400, f"unknown kind {kind!r}")
        if limit < 1 or offset < 0:
            return _error(400, "limit must be >= 1 and offset >= 0")
        matches = state.search_index.search(q, kind=kind, limit=limit + offset)[offset:]
        return ok(
            {
                "query": q,
                "results": [
                    {"id": nid, "name": name, "kind": state.point_by_id[nid].node_kind}
                    for nid, name in matches
                ],
            }
        )

    @app.get("/api/nodes/{node_id}")
    def node_profile(node_id: str) -> Response:
        point = state.point_by_id.get(node_id)
        if node_id in state.snapshot.authors:
            author = state.snapshot.authors[node_id]
            payload = {
                "id": node_id,
                "kind": "talent",
                "name": author.display_name,
                "institution": author.institution,
                "publication_count": state.snapshot.publication_count.get(node_id, 0),
                "career_start_year": author.career_start_year,
                "detail_url": author.detail_url,
                "x": _round6(point.x) if point else None,
                "y": _round6(point.y) if point else None,
                "display_size": _round6(point.display_size) if point else None,
            }
        elif node_id in state.snapshot.datasets:
            ds = state.snapshot.datasets[node_id]
            payload = {
                "id": node_id,
                "kind": "dataset",
                "name": ds.name,
                "description": ds.description,
                "x": _round6(point.x) if point else None,
                "y": _round6(point.y) if point else None,
                "display_size": _round6(point.display_size) if point else None,
            }
        else:
            return _error(404, f"unknown node {node_id!r}")
        return ok(payload)

    @app.get("/api/viewport")
    def viewport(x0: float, y0: float, x1: float, y1: float, limit: int = DEFAULT_VIEWPORT_CAP) -> Response:
        if not (x0 < x1 and y0 < y1):
            return _error(400, "bbox must satisfy x0 < x1 and y0 < y1")
        if limit < 1:
            return _error(400, "limit must be >= 1")
        limit = min(limit, config.viewport_cap)
        points = spatial.query_viewport(state.tree, (x0, y0, x1, y1), limit)
        return ok(serialize_viewport(points, state.names))

    @app.get("/api/nodes/{node_id}/recommendations")
    def recommendations(node_id: str, limit: int = 30, offset: int = 0) -> Response:
        if limit < 1 or offset < 0:
            return _error(400, "limit must be >= 1 and offset >= 0")
        if node_id in state.snapshot.authors:
            entries = state.recommendations.collaborator_recs.get(node_id, [])
            kind = "collaborator"
        elif node_id in state.snapshot.datasets:
            entries = state.recommendations.dataset_user_recs.get(node_id, [])
            kind = "dataset_user"
        else:
            return _error(404, f"unknown node {node_id!r}")
        window = entries[offset : offset + limit]
        return ok(
            {
                "source": node_id,
                "kind": kind,
                "total": len(entries),
                "entries": [
                    {
                        "target": e.target_id,
                        "name": state.names.get(e.target_id, e.target_id),
                        "score": _round6(e.score),
                        "rank": e.rank,
                    }
                    for e in window
                ],
            }
        )

    @app.get("/api/nodes/{node_id}/collaborators")
    def collaborators(node_id: str) -> Response:
        if node_id not in state.snapshot.authors:
            return _error(404, f"unknown node {node_id!r}")
        ids = spatial.collaborator_highlight(node_id, state.snapshot, state.layout_ids)
        return ok({"id": node_id, "collaborators": sorted(ids)})

    @app.post("/api/justifications")
    def justification(body: dict) -> Response:
        kind = body.get("kind")
        source = body.get("source")
        target = body.get("target")
        if kind not in ("collaborator", "dataset_user") or not source or not target:
            return _error(400, "body must carry kind=collaborator|dataset_user, source, target")
        if target not in state.snapshot.authors:
            return _error(404, f"unknown target author {target!r}")
        try:
            if kind == "collaborator":
                if source not in state.snapshot.authors:
                    return _error(404, f"unknown source author {source!r}")
                prompt = build_collaborator_prompt(
                    select_evidence(source, state.snapshot),
                    select_evidence(target, state.snapshot),
                    state.snapshot.authors[source].display_name,
                    state.snapshot.authors[target].display_name,
                )
            else:
                if source not in state.snapshot.datasets:
                    return _error(404, f"unknown source dataset {source!r}")
                prompt = build_dataset_user_prompt(
                    select_evidence(target, state.snapshot),
                    state.snapshot.datasets[source],
                    state.snapshot.authors[target].display_name,
                )
        except ValueError as exc:
            return _error(400, str(exc))
        key = JustificationKey(kind, source, target)
        try:
            record, hit = state.justifications.fetch(key, prompt)
        except JustificationQueueFull as exc:
            return _error(429, str(exc))
        except ProviderError as exc:
            return _error(502, str(exc), retriable=exc.retriable)
        payload = {
            "kind": kind,
            "source": source,
            "target": target,
            "text": record.text,
            "model": record.model_id,
            "created_at": record.created_at,
        }
        return ok(payload, headers={"X-Cache": "hit" if hit else "miss"})

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(config.static_dir), html=True), name="ui")
    return app


def serve(config: ServerConfig) -> None:
    """Load artifacts, then block serving the API (CLI entry point)."""
    import uvicorn

    state = AppState.load(config)
    app = build_app(state, config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
