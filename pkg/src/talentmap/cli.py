"""Pipeline CLI: ingest -> embed -> recommend -> layout -> serve.

Each stage reads the previous stage's artifacts from the output directory,
so the server only ever loads finished, immutable files.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_mod
from . import figures
from .embeddings import EmbeddingStore, aggregate_all, load_embeddings, read_embeddings, write_embeddings
from .layout import LayoutConfig, run_layout
from .layout.formats import LayoutRecord, read_layout, write_layout
from .recommend import build_recommendation_table, read_recommendations, write_recommendations
from .server import ServerConfig, serve as serve_app
from .spatial import node_display_size
from .justify import ProviderConfig


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
def main() -> None:
    """Semantic map pipeline for researchers and datasets."""


@main.command()
@click.option("--input-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--output-dir", required=True, type=click.Path(file_okay=False))
@click.option("--cutoff-year", default=2020, show_default=True, help="retain authors with a paper after this year")
def ingest(input_dir: str, output_dir: str, cutoff_year: int) -> None:
    """Parse and index papers/authors/datasets record files."""
    in_dir = Path(input_dir)
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        snapshot = corpus_mod.load_corpus(
            in_dir / "papers.jsonl",
            in_dir / "authors.jsonl",
            in_dir / "datasets.jsonl",
            activity_cutoff_year=cutoff_year,
        )
    except corpus_mod.CorpusError as exc:
        raise click.ClickException(str(exc))
    violations = corpus_mod.validate_snapshot(snapshot)
    if violations:
        raise click.ClickException("snapshot invariants violated: " + "; ".join(violations[:5]))
    corpus_mod.save_snapshot(snapshot, out_dir / "snapshot.json")
    click.echo(
        f"ingested {len(snapshot.papers)} papers, {len(snapshot.authors)} retained authors "
        f"({len(snapshot.removed_author_ids)} filtered), {len(snapshot.datasets)} datasets"
    )


@main.command()
@click.option("--input-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="directory holding embeddings.emb1 (per-paper vectors)")
@click.option("--output-dir", required=True, type=click.Path(exists=True, file_okay=False))
def embed(input_dir: str, output_dir: str) -> None:
    """Aggregate per-paper vectors into author and dataset vectors."""
    out_dir = Path(output_dir)
    snapshot = corpus_mod.load_snapshot(out_dir / "snapshot.json")
    store = load_embeddings(Path(input_dir) / "embeddings.emb1")
    aggregate_all(snapshot, store)
    if not store.author_vectors:
        raise click.ClickException("no author gained a vector; check the embeddings file")
    write_embeddings(out_dir / "author_vectors.emb1", store.author_vectors)
    if store.dataset_vectors:
        write_embeddings(out_dir / "dataset_vectors.emb1", store.dataset_vectors)
    click.echo(
        f"aggregated {len(store.author_vectors)} author and {len(store.dataset_vectors)} dataset vectors "
        f"(dimension {store.dimension})"
    )


def _load_aggregated(out_dir: Path) -> EmbeddingStore:
    dim, authors = read_embeddings(out_dir / "author_vectors.emb1")
    store = EmbeddingStore(dimension=dim)
    store.author_vectors = {k: v.astype(np.float64) for k, v in authors.items()}
    ds_path = out_dir / "dataset_vectors.emb1"
    if ds_path.exists():
        _, datasets = read_embeddings(ds_path)
        store.dataset_vectors = {k: v.astype(np.float64) for k, v in datasets.items()}
    return store


@main.command()
@click.option("--output-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--k-collab", default=30, show_default=True)
@click.option("--k-users", default=150, show_default=True)
def recommend(output_dir: str, k_collab: int, k_users: int) -> None:
    """Build the top-k collaborator and dataset-user tables."""
    out_dir = Path(output_dir)
    snapshot = corpus_mod.load_snapshot(out_dir / "snapshot.json")
    store = _load_aggregated(out_dir)
    table = build_recommendation_table(snapshot, store, k_collab=k_collab, k_users=k_users)
    write_recommendations(table, out_dir / "recommendations.jsonl")
    figures.render_score_histogram(table, out_dir / "recommendation_scores.png")
    click.echo(
        f"wrote recommendations for {len(table.collaborator_recs)} authors and "
        f"{len(table.dataset_user_recs)} datasets "
        f"(skipped {table.skipped_authors} vectorless authors, {table.skipped_datasets} datasets)"
    )


@main.command()
@click.option("--output-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--method", type=click.Choice(["tsne", "umap"]), default="tsne", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--perplexity", default=30.0, show_default=True)
@click.option("--iterations", default=1000, show_default=True, help="t-SNE iterations / UMAP epochs")
def layout(output_dir: str, method: str, seed: int, perplexity: float, iterations: int) -> None:
    """Reduce aggregated vectors to the 2D map and render it."""
    out_dir = Path(output_dir)
    snapshot = corpus_mod.load_snapshot(out_dir / "snapshot.json")
    store = _load_aggregated(out_dir)
    config = LayoutConfig(method=method, random_seed=seed)
    config.tsne.perplexity = perplexity
    config.tsne.iterations = iterations
    if method == "umap":
        config.umap.epochs = iterations
    vectors: dict[str, np.ndarray] = {}
    kinds: dict[str, str] = {}
    for aid, vec in store.author_vectors.items():
        vectors[aid] = vec
        kinds[aid] = "talent"
    for did, vec in store.dataset_vectors.items():
        vectors[did] = vec
        kinds[did] = "dataset"
    result = run_layout(vectors, config)
    records = [
        LayoutRecord(
            node_id=nid,
            x=x,
            y=y,
            node_kind=kinds[nid],
            display_size=node_display_size(snapshot.publication_count.get(nid, 0), kinds[nid]),
        )
        for nid, (x, y) in sorted(result.coordinates.items())
    ]
    write_layout(out_dir / "layout.lay1", records)
    with open(out_dir / "layout_history.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective"])
        writer.writerows(result.objective_history)
    quality = {
        "method": result.method,
        "objective": result.objective,
        "trustworthiness": result.trustworthiness,
        "nodes": len(records),
    }
    (out_dir / "layout_quality.json").write_text(json.dumps(quality, indent=2), encoding="utf-8")
    figures.render_layout_figure(records, out_dir / "layout.png")
    figures.render_objective_figure(
        result.objective_history,
        out_dir / "layout_objective.png",
        "KL divergence" if method == "tsne" else "cross-entropy",
    )
    click.echo(
        f"layout of {len(records)} nodes via {method}: objective {result.objective:.4f}, "
        f"trustworthiness {result.trustworthiness:.4f}"
    )


@main.command()
@click.option("--output-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="directory with the pipeline artifacts")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--mock-llm", is_flag=True, help="use the deterministic offline justification provider")
def serve(output_dir: str, config_path: str | None, port: int, host: str, mock_llm: bool) -> None:
    """Serve the API (and UI assets, if built) over the finished artifacts."""
    overrides = _load_config_file(config_path)
    provider = ProviderConfig.from_env(mock=mock_llm or bool(overrides.get("mock_llm")))
    for key in ("endpoint", "api_key", "model_id", "timeout", "response_text_path"):
        if key in overrides.get("provider", {}):
            setattr(provider, key, overrides["provider"][key])
    static_dir = overrides.get("static_dir")
    if static_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = candidate if candidate.is_dir() else None
    cfg = ServerConfig(
        host=overrides.get("host", host),
        port=int(overrides.get("port", port)),
        data_dir=Path(output_dir),
        viewport_cap=int(overrides.get("viewport_cap", 5000)),
        cors_origins=list(overrides.get("cors_origins", [])),
        provider=provider,
        static_dir=Path(static_dir) if static_dir else None,
    )
    serve_app(cfg)


if __name__ == "__main__":
    main()
