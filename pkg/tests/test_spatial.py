import numpy as np
import pytest
from hypothesis import given, strategies as st

from talentmap.spatial import (
    LayoutPoint,
    SearchIndex,
    build_quadtree,
    collaborator_highlight,
    node_display_size,
    query_viewport,
)

from oracles import viewport_scan


def make_points(n_talents=2000, n_datasets=100, seed=0, extent=1000.0):
    rng = np.random.default_rng(seed)
    points = []
    for i in range(n_talents):
        pubs = int(rng.pareto(1.2) * 5)
        points.append(
            LayoutPoint(
                node_id=f"a{i:05d}",
                x=float(rng.uniform(-extent, extent)),
                y=float(rng.uniform(-extent, extent)),
                node_kind="talent",
                display_size=node_display_size(pubs, "talent"),
                importance=node_display_size(pubs, "talent"),
            )
        )
    for j in range(n_datasets):
        points.append(
            LayoutPoint(
                node_id=f"d{j:04d}",
                x=float(rng.uniform(-extent, extent)),
                y=float(rng.uniform(-extent, extent)),
                node_kind="dataset",
                display_size=6.0,
                importance=6.0,
            )
        )
    return points


class TestDisplaySize:
    def test_zero_publications(self):
        assert node_display_size(0, "talent") == 2.0

    def test_ninety_nine_publications(self):
        assert node_display_size(99, "talent") == pytest.approx(8.0)

    def test_dataset_fixed(self):
        assert node_display_size(0, "dataset") == 6.0
        assert node_display_size(12345, "dataset") == 6.0

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            node_display_size(-1, "talent")

    @given(st.integers(min_value=0, max_value=10**6))
    def test_monotone_and_positive(self, c):
        size = node_display_size(c, "talent")
        assert size > 0
        assert node_display_size(2 * c, "talent") >= size


class TestQuadTree:
    def test_traversal_recovers_exact_point_multiset(self):
        points = make_points(1500, 80)
        tree = build_quadtree(points)
        recovered = tree.traverse_points()
        assert sorted(p.node_id for p in recovered) == sorted(p.node_id for p in points)
        assert len(recovered) == len(points)

    def test_single_point_tree(self):
        p = LayoutPoint("only", 1.0, 2.0, "talent", 3.0, 3.0)
        tree = build_quadtree([p])
        assert tree.root.children is None
        assert query_viewport(tree, (0, 0, 5, 5), 10) == [p]

    def test_coincident_points_all_retained(self):
        points = [
            LayoutPoint(f"n{i}", 5.0, 5.0, "talent", 2.0, 2.0) for i in range(100)
        ]
        tree = build_quadtree(points, leaf_capacity=4)
        assert len(tree.traverse_points()) == 100

    def test_points_within_cell_bounds(self):
        points = make_points(800, 40, seed=3)
        tree = build_quadtree(points, leaf_capacity=16)

        def walk(cell):
            if cell.children is None:
                for r in cell.point_rows:
                    assert cell.x0 <= tree.xs[r] <= cell.x1
                    assert cell.y0 <= tree.ys[r] <= cell.y1
            else:
                # children tile the parent exactly
                xs = sorted({c.x0 for c in cell.children} | {c.x1 for c in cell.children})
                ys = sorted({c.y0 for c in cell.children} | {c.y1 for c in cell.children})
                assert xs[0] == cell.x0 and xs[-1] == cell.x1
                assert ys[0] == cell.y0 and ys[-1] == cell.y1
                for c in cell.children:
                    walk(c)

        walk(tree.root)

    def test_max_importance_tracks_subtree(self):
        points = make_points(500, 20, seed=5)
        tree = build_quadtree(points)

        def walk(cell):
            if not cell.ordered.size:
                return
            assert cell.max_importance == pytest.approx(
                max(tree.importance[r] for r in cell.ordered)
            )
            if cell.children is not None:
                for c in cell.children:
                    walk(c)

        walk(tree.root)


class TestViewport:
    def test_full_bbox_returns_everything(self):
        points = make_points(1000, 50)
        tree = build_quadtree(points)
        got = query_viewport(tree, (-1001, -1001, 1001, 1001), len(points) + 10)
        assert sorted(p.node_id for p in got) == sorted(p.node_id for p in points)

    def test_matches_scan_oracle_on_random_bboxes(self):
        points = make_points(1200, 60, seed=7)
        tree = build_quadtree(points)
        rng = np.random.default_rng(8)
        for _ in range(200):
            xs = np.sort(rng.uniform(-1100, 1100, 2))
            ys = np.sort(rng.uniform(-1100, 1100, 2))
            if xs[0] == xs[1] or ys[0] == ys[1]:
                continue
            bbox = (xs[0], ys[0], xs[1], ys[1])
            limit = int(rng.integers(1, 400))
            got = query_viewport(tree, bbox, limit)
            want = viewport_scan(points, bbox, limit)
            assert [p.node_id for p in got] == [p.node_id for p in want]

    def test_empty_region(self):
        points = make_points(200, 10)
        tree = build_quadtree(points)
        assert query_viewport(tree, (2000, 2000, 3000, 3000), 10) == []

    def test_lod_keeps_highest_importance(self):
        points = make_points(900, 0, seed=9)
        tree = build_quadtree(points)
        got = query_viewport(tree, (-1001, -1001, 1001, 1001), 100)
        want = viewport_scan(points, (-1001, -1001, 1001, 1001), 100)
        assert [p.node_id for p in got] == [p.node_id for p in want]
        assert len(got) == 100

    def test_disjoint_partition_covers_all_points_once(self):
        points = make_points(700, 30, seed=10)
        tree = build_quadtree(points)
        seen: list[str] = []
        cuts = [-1001, -500, 0, 500, 1001]
        eps = 1e-9
        for i in range(4):
            for j in range(4):
                # half-open tiles realized by shrinking the far edges
                bbox = (cuts[i], cuts[j], cuts[i + 1] - eps, cuts[j + 1] - eps)
                seen += [p.node_id for p in query_viewport(tree, bbox, 10**6)]
        assert sorted(seen) == sorted(p.node_id for p in points)

    def test_invalid_bbox_rejected(self):
        points = make_points(10, 0)
        tree = build_quadtree(points)
        with pytest.raises(ValueError):
            query_viewport(tree, (5, 0, 5, 10), 10)
        with pytest.raises(ValueError):
            query_viewport(tree, (0, 0, 10, 10), 0)

    def test_order_is_importance_desc_then_id(self):
        points = [
            LayoutPoint("b", 0.0, 0.0, "talent", 5.0, 5.0),
            LayoutPoint("a", 1.0, 1.0, "talent", 5.0, 5.0),
            LayoutPoint("c", 2.0, 2.0, "talent", 9.0, 9.0),
        ]
        tree = build_quadtree(points)
        got = query_viewport(tree, (-1, -1, 3, 3), 10)
        assert [p.node_id for p in got] == ["c", "a", "b"]


class TestSearch:
    def make_index(self):
        return SearchIndex(
            [
                ("a3", "Ann", "talent"),
                ("a4", "Anna", "talent"),
                ("a5", "Joanne", "talent"),
                ("d1", "Interaction Screening Data", "dataset"),
            ]
        )

    def test_exact_then_prefix_then_substring(self):
        idx = self.make_index()
        got = idx.search("ann", limit=10)
        assert [name for _, name in got] == ["Ann", "Anna", "Joanne"]

    def test_case_insensitive_exact_match_first(self):
        idx = self.make_index()
        got = idx.search("aNN", limit=10)
        assert got[0][1] == "Ann"

    def test_empty_query_returns_nothing(self):
        assert self.make_index().search("", limit=5) == []

    def test_kind_filter(self):
        idx = self.make_index()
        got = idx.search("a", kind="dataset", limit=10)
        assert [nid for nid, _ in got] == ["d1"]

    def test_limit_respected(self):
        idx = self.make_index()
        assert len(idx.search("a", limit=2)) == 2

    def test_tie_by_ascending_name(self):
        idx = SearchIndex([("x2", "Beta", "talent"), ("x1", "Alpha", "talent")])
        got = idx.search("a", limit=10)  # substring hits both
        assert [name for _, name in got] == ["Alpha", "Beta"]


class TestHighlight:
    def test_fixture_author_highlight(self, snapshot):
        layout_ids = frozenset(snapshot.authors)  # all retained authors mapped
        got = collaborator_highlight("a1", snapshot, layout_ids)
        assert got == {"a2", "a3", "a4"}  # a6 was filtered out at ingest

    def test_vectorless_coauthor_not_highlighted(self, snapshot):
        layout_ids = frozenset({"a2", "a3"})  # a4 absent from the map
        got = collaborator_highlight("a1", snapshot, layout_ids)
        assert got == {"a2", "a3"}

    def test_no_coauthors_empty(self, snapshot):
        from talentmap.corpus import AuthorRecord, PaperRecord, build_snapshot

        snap = build_snapshot(
            [PaperRecord("p", "t", "", 2022, "", 0, ("solo",), frozenset())],
            [AuthorRecord("solo", "Solo")],
            [],
        )
        assert collaborator_highlight("solo", snap, frozenset({"solo"})) == set()

    def test_never_contains_self(self, snapshot):
        for aid in snapshot.authors:
            got = collaborator_highlight(aid, snapshot, frozenset(snapshot.authors))
            assert aid not in got

    def test_unknown_author_raises(self, snapshot):
        with pytest.raises(KeyError):
            collaborator_highlight("ghost", snapshot, frozenset())
