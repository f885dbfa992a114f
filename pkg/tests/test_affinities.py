import numpy as np
import pytest

from talentmap.layout import compute_affinities, knn_distances, realized_perplexity
from talentmap.layout.config import LayoutError

from oracles import entropy_perplexity


def test_three_equidistant_points_give_uniform_conditionals():
    # equilateral triangle: symmetry forces each conditional to (0.5, 0.5)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    res = compute_affinities(pts, perplexity=2.0, metric="sqeuclidean")
    cond = res.conditional.toarray()
    for i in range(3):
        row = cond[i][cond[i] > 0]
        assert row == pytest.approx([0.5, 0.5])
    assert res.failed_points == []


def test_realized_perplexity_within_tolerance():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200, 16))
    target = 25.0
    res = compute_affinities(X, target)
    perp = realized_perplexity(res.conditional)
    assert np.abs(perp - target).max() <= 1e-3 * target  # 0.1%


def test_realized_perplexity_matches_definitional_oracle():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((60, 8))
    res = compute_affinities(X, 10.0)
    cond = res.conditional
    for i in range(60):
        row = cond.getrow(i).toarray().ravel()
        assert entropy_perplexity(row) == pytest.approx(10.0, rel=1e-4)


def test_joint_matrix_properties():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((120, 12))
    res = compute_affinities(X, 15.0)
    J = res.joint
    assert abs(J.sum() - 1.0) <= 1e-6
    assert abs(J - J.T).max() <= 1e-15
    assert J.min() >= 0.0
    assert J.diagonal().max() == 0.0
    # sparse: about 3*perplexity neighbors per point
    assert res.n_neighbors == 45


def test_identical_points_fall_back_without_nan():
    X = np.zeros((30, 4))
    res = compute_affinities(X, 5.0)
    assert len(res.failed_points) == 30
    assert np.all(np.isfinite(res.joint.toarray()))
    assert abs(res.joint.sum() - 1.0) <= 1e-6


def test_perplexity_must_be_below_n():
    with pytest.raises(LayoutError):
        compute_affinities(np.zeros((5, 2)), perplexity=5.0)


def test_knn_is_exact_and_sorted():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((80, 6))
    idx, dist = knn_distances(X, 10, metric="sqeuclidean")
    d_full = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    for i in range(80):
        others = np.delete(np.arange(80), i)
        want = others[np.argsort(d_full[i][others], kind="stable")][:10]
        assert set(idx[i]) == set(want)
        assert np.all(np.diff(dist[i]) >= 0)
        assert i not in idx[i]


def test_cosine_metric_matches_definition():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((40, 5))
    idx, dist = knn_distances(X, 3, metric="cosine")
    Xn = X / np.linalg.norm(X, axis=1, keepdims=True)
    for i in range(40):
        for j, d in zip(idx[i], dist[i]):
            assert d == pytest.approx(1.0 - float(Xn[i] @ Xn[j]), abs=1e-12)
