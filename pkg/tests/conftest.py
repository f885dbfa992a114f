import json
from pathlib import Path

import numpy as np
import pytest

from talentmap.corpus import load_corpus
from talentmap.embeddings import aggregate_all, load_embeddings

FIXTURE_DIR = Path(__file__).parent / "data" / "talent_fixture"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def expected() -> dict:
    with open(FIXTURE_DIR / "expected.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def snapshot():
    return load_corpus(
        FIXTURE_DIR / "papers.jsonl",
        FIXTURE_DIR / "authors.jsonl",
        FIXTURE_DIR / "datasets.jsonl",
    )


@pytest.fixture(scope="session")
def store(snapshot):
    st = load_embeddings(FIXTURE_DIR / "embeddings.emb1")
    aggregate_all(snapshot, st)
    return st


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory) -> Path:
    """Medium synthetic corpus shared by the e2e and acceptance tests."""
    from talentmap.synth import make_synthetic_corpus

    out = tmp_path_factory.mktemp("synth_corpus")
    make_synthetic_corpus(out)
    return out


@pytest.fixture(scope="session")
def pipeline_dir(tmp_path_factory, synth_corpus) -> Path:
    """Artifacts of a full CLI pipeline run over the synthetic corpus."""
    from click.testing import CliRunner

    from talentmap.cli import main

    out = tmp_path_factory.mktemp("pipeline_out")
    runner = CliRunner()
    steps = [
        ["ingest", "--input-dir", str(synth_corpus), "--output-dir", str(out)],
        ["embed", "--input-dir", str(synth_corpus), "--output-dir", str(out)],
        ["recommend", "--output-dir", str(out)],
        ["layout", "--output-dir", str(out), "--seed", "0", "--method", "tsne",
         "--perplexity", "30", "--iterations", "120"],
    ]
    for args in steps:
        result = runner.invoke(main, args, catch_exceptions=False)
        assert result.exit_code == 0, f"{args[0]} failed: {result.output}"
    return out


def three_cluster_benchmark(
    n_per_cluster: int = 150,
    dim: int = 768,
    sigma: float = 0.01,
    intrinsic_dim: int = 2,
    seed: int = 7,
):
    """Well-separated Gaussian clusters at mutually orthogonal centers.

    Each cluster's covariance is degenerate (rank `intrinsic_dim`, sigma per
    intrinsic axis): a 2D layout can only be judged on neighborhoods the data
    can actually express in two dimensions. With full-rank isotropic noise at
    this dimension no 2D embedding preserves 10-NN ranks, so the quality gate
    would measure the data, not the layout.
    """
    rng = np.random.default_rng(seed)
    centers = np.zeros((3, dim))
    centers[0, 0] = centers[1, 1] = centers[2, 2] = 1.0
    points = []
    for c in range(3):
        basis, _ = np.linalg.qr(rng.standard_normal((dim, intrinsic_dim)))
        spread = rng.standard_normal((n_per_cluster, intrinsic_dim))
        points.append(centers[c] + sigma * spread @ basis.T)
    labels = np.repeat(np.arange(3), n_per_cluster)
    return np.concatenate(points), labels
