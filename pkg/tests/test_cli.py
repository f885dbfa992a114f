"""End-to-end pipeline: ingest -> embed -> recommend -> layout -> serve,
exercised through the CLI on the synthetic corpus."""

import json

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from talentmap import spatial
from talentmap.cli import main
from talentmap.corpus import load_snapshot
from talentmap.embeddings import read_embeddings
from talentmap.justify import ProviderConfig
from talentmap.layout.formats import read_layout
from talentmap.server import AppState, ServerConfig, build_app, canonical_json, serialize_viewport


@pytest.fixture(scope="module")
def served(pipeline_dir, tmp_path_factory):
    # private copy: the justification cache file must start empty regardless
    # of what other modules already asked the shared pipeline artifacts
    import shutil

    data_dir = tmp_path_factory.mktemp("served_data")
    for f in pipeline_dir.iterdir():
        if f.name != "justifications.jsonl":
            shutil.copy2(f, data_dir / f.name)
    config = ServerConfig(data_dir=data_dir, provider=ProviderConfig(mock=True))
    state = AppState.load(config)
    return state, config, TestClient(build_app(state, config), raise_server_exceptions=False)


def test_pipeline_artifacts_exist(pipeline_dir):
    for name in [
        "snapshot.json",
        "author_vectors.emb1",
        "dataset_vectors.emb1",
        "recommendations.jsonl",
        "recommendation_scores.png",
        "layout.lay1",
        "layout.png",
        "layout_objective.png",
        "layout_history.csv",
        "layout_quality.json",
    ]:
        assert (pipeline_dir / name).exists(), name


def test_corpus_scale_meets_floor(pipeline_dir):
    snapshot = load_snapshot(pipeline_dir / "snapshot.json")
    assert len(snapshot.authors) >= 5000


def test_aggregated_vectors_unit_norm(pipeline_dir):
    _, vectors = read_embeddings(pipeline_dir / "author_vectors.emb1")
    norms = np.array([np.linalg.norm(v) for v in vectors.values()])
    assert np.abs(norms - 1.0).max() < 1e-5  # float32 storage rounding


def test_layout_covers_every_vector(pipeline_dir):
    records = read_layout(pipeline_dir / "layout.lay1")
    _, authors = read_embeddings(pipeline_dir / "author_vectors.emb1")
    _, datasets = read_embeddings(pipeline_dir / "dataset_vectors.emb1")
    assert {r.node_id for r in records} == set(authors) | set(datasets)
    assert all(np.isfinite([r.x, r.y]).all() for r in records)


def test_layout_history_is_csv_with_decreasing_tail(pipeline_dir):
    rows = (pipeline_dir / "layout_history.csv").read_text().strip().splitlines()
    assert rows[0] == "iteration,objective"
    assert len(rows) >= 2


def test_healthz(served):
    _, _, client = served
    resp = client.get("/healthz")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["nodes"] >= 5000


def test_viewport_byte_matches_module(served):
    state, _, client = served
    for bbox, limit in [
        ((-1000, -1000, 1000, 1000), 5000),
        ((-1000, -1000, 1000, 1000), 137),
        ((-250, -250, 250, 250), 500),
    ]:
        resp = client.get(
            "/api/viewport",
            params={"x0": bbox[0], "y0": bbox[1], "x1": bbox[2], "y1": bbox[3], "limit": limit},
        )
        assert resp.status_code == 200
        points = spatial.query_viewport(state.tree, tuple(map(float, bbox)), limit)
        assert resp.content == canonical_json(serialize_viewport(points, state.names))


def test_search_flow(served):
    state, _, client = served
    some_author = next(iter(state.snapshot.authors.values()))
    q = some_author.display_name.split()[0]
    resp = client.get("/api/search", params={"q": q, "limit": 5})
    assert resp.status_code == 200
    results = resp.json()["results"]
    assert results
    node = client.get(f"/api/nodes/{results[0]['id']}")
    assert node.status_code == 200


def test_justification_flow_offline(served):
    state, _, client = served
    aid, recs = next(
        (a, r) for a, r in state.recommendations.collaborator_recs.items() if r
    )
    target = recs[0].target_id
    body = {"kind": "collaborator", "source": aid, "target": target}
    first = client.post("/api/justifications", json=body)
    assert first.status_code == 200
    assert first.headers["X-Cache"] == "miss"
    again = client.post("/api/justifications", json=body)
    assert again.headers["X-Cache"] == "hit"


def test_recommendations_route(served):
    state, _, client = served
    aid = next(a for a, r in state.recommendations.collaborator_recs.items() if len(r) == 30)
    resp = client.get(f"/api/nodes/{aid}/recommendations", params={"limit": 30})
    body = resp.json()
    assert len(body["entries"]) == 30
    scores = [e["score"] for e in body["entries"]]
    assert scores == sorted(scores, reverse=True)


def test_ingest_rejects_malformed_corpus(tmp_path, synth_corpus):
    bad_dir = tmp_path / "bad"
    bad_dir.mkdir()
    (bad_dir / "papers.jsonl").write_text('{"id": "p1", "not_valid": tru\n')
    (bad_dir / "authors.jsonl").write_text("")
    (bad_dir / "datasets.jsonl").write_text("")
    runner = CliRunner()
    result = runner.invoke(
        main, ["ingest", "--input-dir", str(bad_dir), "--output-dir", str(tmp_path / "o")]
    )
    assert result.exit_code != 0
    assert "line 1" in result.output
