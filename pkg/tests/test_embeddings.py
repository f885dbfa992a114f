import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from talentmap.corpus import AuthorRecord, PaperRecord, build_snapshot
from talentmap.embeddings import (
    EmbeddingError,
    EmbeddingStore,
    aggregate_author_embedding,
    aggregate_dataset_embedding,
    position_weight,
    read_embeddings,
    write_embeddings,
)


class TestPositionWeight:
    def test_first_and_last_author_weigh_one(self):
        assert position_weight(1, 5) == 1.0
        assert position_weight(5, 5) == 1.0

    def test_middle_author_weighs_reciprocal(self):
        assert position_weight(3, 5) == pytest.approx(1 / 3)
        assert position_weight(2, 4) == 0.5

    def test_deep_positions_floor_at_tenth(self):
        assert position_weight(12, 20) == 0.1
        assert position_weight(11, 20) == 0.1
        assert position_weight(10, 20) == pytest.approx(0.1)

    def test_sole_author(self):
        assert position_weight(1, 1) == 1.0

    def test_last_author_rule_overrides_reciprocal(self):
        # position n earns 1 even when 1/n would apply
        assert position_weight(4, 4) == 1.0
        assert position_weight(15, 15) == 1.0

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            position_weight(0, 3)
        with pytest.raises(ValueError):
            position_weight(4, 3)
        with pytest.raises(ValueError):
            position_weight(1, 0)

    def test_exhaustive_properties_up_to_50(self):
        for n in range(1, 51):
            weights = [position_weight(k, n) for k in range(1, n + 1)]
            assert all(0 < w <= 1 for w in weights)
            assert weights[0] == 1.0 and weights[-1] == 1.0
            middle = weights[1:-1]
            # non-increasing over middle positions, constant past the 10th
            assert all(a >= b for a, b in zip(middle, middle[1:]))
            for k in range(11, n):  # positions 11..n-1
                assert weights[k - 1] == 0.1


def _mini_snapshot(papers):
    author_ids = sorted({a for p in papers for a in p.author_ids})
    authors = [AuthorRecord(a, a.upper()) for a in author_ids]
    return build_snapshot(papers, authors, [], activity_cutoff_year=2020)


def _basis(i, dim=4):
    v = np.zeros(dim)
    v[i] = 1.0
    return v


class TestAggregation:
    def test_identical_vectors_normalize(self):
        papers = [
            PaperRecord(f"p{i}", "t", "", 2022, "", 0, ("a1", "a2"), frozenset())
            for i in range(3)
        ]
        snap = _mini_snapshot(papers)
        v = np.array([3.0, 4.0, 0.0, 0.0])
        store = EmbeddingStore(4, {f"p{i}": v for i in range(3)})
        out = aggregate_author_embedding("a1", snap, store)
        assert np.allclose(out, v / 5.0)

    def test_weighted_two_paper_example(self):
        papers = [
            PaperRecord("p1", "t", "", 2022, "", 0, ("a1", "b", "c"), frozenset()),
            PaperRecord("p2", "t", "", 2022, "", 0, ("b", "a1", "c"), frozenset()),
        ]
        snap = _mini_snapshot(papers)
        store = EmbeddingStore(4, {"p1": _basis(0), "p2": _basis(1)})
        out = aggregate_author_embedding("a1", snap, store)
        # 1*e1 + 0.5*e2, normalized
        assert out == pytest.approx([0.894427, 0.447214, 0.0, 0.0], abs=1e-6)

    def test_zero_evidence_author_absent(self):
        papers = [PaperRecord("p1", "t", "", 2022, "", 0, ("a1",), frozenset())]
        authors = [AuthorRecord("a1", "A"), AuthorRecord("core", "C", is_core=True)]
        snap = build_snapshot(papers, authors, [])
        store = EmbeddingStore(4, {"p1": _basis(0)})
        assert aggregate_author_embedding("core", snap, store) is None

    def test_papers_without_vectors_are_skipped(self):
        papers = [
            PaperRecord("p1", "t", "", 2022, "", 0, ("a1",), frozenset()),
            PaperRecord("p2", "t", "", 2022, "", 0, ("a1",), frozenset()),
        ]
        snap = _mini_snapshot(papers)
        store = EmbeddingStore(4, {"p1": _basis(2)})
        assert np.allclose(aggregate_author_embedding("a1", snap, store), _basis(2))

    def test_unknown_author_raises(self, snapshot, store):
        with pytest.raises(KeyError):
            aggregate_author_embedding("nobody", snapshot, store)

    def test_scale_invariance(self, snapshot, store):
        scaled = EmbeddingStore(
            store.dimension, {k: 37.5 * v for k, v in store.paper_vectors.items()}
        )
        for aid in snapshot.authors:
            a = aggregate_author_embedding(aid, snapshot, store)
            b = aggregate_author_embedding(aid, snapshot, scaled)
            if a is None:
                assert b is None
            else:
                assert np.allclose(a, b, atol=1e-6)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        papers = [
            PaperRecord(f"p{i}", "t", "", 2022, "", 0, ("a1", "b"), frozenset())
            for i in range(6)
        ]
        vecs = {f"p{i}": rng.standard_normal(8) for i in range(6)}
        snap_fwd = _mini_snapshot(papers)
        snap_rev = _mini_snapshot(list(reversed(papers)))
        store = EmbeddingStore(8, vecs)
        a = aggregate_author_embedding("a1", snap_fwd, store)
        b = aggregate_author_embedding("a1", snap_rev, store)
        assert np.allclose(a, b)

    def test_fixture_vectors_match_expected(self, snapshot, store, expected):
        for aid, vec in expected["author_vectors"].items():
            got = aggregate_author_embedding(aid, snapshot, store)
            assert np.allclose(got, vec, atol=1e-9), aid
        for did, vec in expected["dataset_vectors"].items():
            got = aggregate_dataset_embedding(did, snapshot, store)
            assert np.allclose(got, vec, atol=1e-9), did

    def test_dataset_mean_example(self):
        papers = [
            PaperRecord("p1", "t", "", 2022, "", 0, ("a1",), frozenset({"d"})),
            PaperRecord("p2", "t", "", 2022, "", 0, ("a1",), frozenset({"d"})),
        ]
        authors = [AuthorRecord("a1", "A")]
        from talentmap.corpus import DatasetRecord

        snap = build_snapshot(papers, authors, [DatasetRecord("d", "D", "")])
        store = EmbeddingStore(4, {"p1": _basis(0), "p2": _basis(1)})
        out = aggregate_dataset_embedding("d", snap, store)
        assert out == pytest.approx([0.707107, 0.707107, 0.0, 0.0], abs=1e-6)

    def test_dataset_with_no_embedded_papers_absent(self):
        papers = [PaperRecord("p1", "t", "", 2022, "", 0, ("a1",), frozenset({"d"}))]
        from talentmap.corpus import DatasetRecord

        snap = build_snapshot(papers, [AuthorRecord("a1", "A")], [DatasetRecord("d", "D", "")])
        assert aggregate_dataset_embedding("d", snap, EmbeddingStore(4)) is None

    def test_aggregates_are_unit_norm(self, store):
        for vec in list(store.author_vectors.values()) + list(store.dataset_vectors.values()):
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-6

    @given(st.integers(min_value=2, max_value=30))
    def test_weight_range_property(self, n):
        for k in range(1, n + 1):
            assert 0.0 < position_weight(k, n) <= 1.0


class TestEmb1Format:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        vectors = {f"id{i}": rng.standard_normal(16).astype(np.float32) for i in range(3)}
        path = tmp_path / "v.emb1"
        write_embeddings(path, vectors)
        dim, loaded = read_embeddings(path)
        assert dim == 16
        for k, v in vectors.items():
            assert loaded[k].tobytes() == v.tobytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.emb1"
        path.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(EmbeddingError, match="magic"):
            read_embeddings(path)

    def test_nan_component_names_record(self, tmp_path):
        path = tmp_path / "nan.emb1"
        with open(path, "wb") as fh:
            fh.write(b"EMB1")
            fh.write(struct.pack("<IQ", 2, 1))
            fh.write(struct.pack("<H", 3) + b"bad")
            fh.write(struct.pack("<2f", 1.0, float("nan")))
        with pytest.raises(EmbeddingError, match="bad"):
            read_embeddings(path)

    def test_truncated_record_reports_offset(self, tmp_path):
        path = tmp_path / "trunc.emb1"
        with open(path, "wb") as fh:
            fh.write(b"EMB1")
            fh.write(struct.pack("<IQ", 768, 1))
            fh.write(struct.pack("<H", 2) + b"id")
            fh.write(struct.pack("<3f", 1.0, 2.0, 3.0))  # far short of 768 floats
        with pytest.raises(EmbeddingError, match=r"truncated record at byte \d+"):
            read_embeddings(path)

    def test_dimension_mismatch_on_write(self, tmp_path):
        with pytest.raises(EmbeddingError, match="dimension"):
            write_embeddings(
                tmp_path / "x.emb1",
                {"a": np.zeros(4, dtype=np.float32), "b": np.zeros(5, dtype=np.float32)},
            )

    def test_reader_accepts_independent_writer(self, fixture_dir):
        # the fixture file is produced by raw struct calls in tools/
        dim, vectors = read_embeddings(fixture_dir / "embeddings.emb1")
        assert dim == 4
        assert set(vectors) == {"p1", "p2", "p3", "p4", "p5", "p6"}
