import json

import pytest

from talentmap.corpus import (
    AuthorRecord,
    CorpusError,
    CorpusSnapshot,
    DatasetRecord,
    PaperRecord,
    build_snapshot,
    load_corpus,
    snapshot_to_json,
    validate_snapshot,
)


def test_activity_filter_drops_inactive_author(snapshot):
    assert "a6" not in snapshot.authors
    assert "a6" in snapshot.removed_author_ids


def test_core_author_with_no_papers_is_retained():
    papers = [PaperRecord("p1", "t", "", 2019, "", 0, ("a1",), frozenset())]
    authors = [
        AuthorRecord("a1", "Someone"),
        AuthorRecord("a2", "Core Person", is_core=True),
    ]
    snap = build_snapshot(papers, authors, [], activity_cutoff_year=2020)
    assert "a2" in snap.authors
    assert snap.publication_count["a2"] == 0
    assert "a1" not in snap.authors  # 2019 paper, not core


def test_cutoff_is_strictly_greater():
    papers = [PaperRecord("p1", "t", "", 2020, "", 0, ("a1",), frozenset())]
    snap = build_snapshot(papers, [AuthorRecord("a1", "X")], [])
    assert "a1" not in snap.authors  # year == cutoff does not count


def test_indexes_match_expected_file(snapshot, expected):
    assert sorted(snapshot.authors) == expected["retained_authors"]
    assert sorted(snapshot.removed_author_ids) == expected["removed_authors"]
    got_co = {a: sorted(s) for a, s in snapshot.coauthor_index.items()}
    assert got_co == expected["coauthor_index"]
    got_users = {d: sorted(s) for d, s in snapshot.dataset_user_index.items()}
    assert got_users == expected["dataset_user_index"]
    assert dict(snapshot.publication_count) == expected["publication_count"]
    assert {a: list(ps) for a, ps in snapshot.author_paper_index.items()} == expected["author_paper_index"]


def test_indexes_match_brute_force_enumeration(snapshot, fixture_dir):
    papers = [json.loads(l) for l in (fixture_dir / "papers.jsonl").read_text().splitlines()]
    retained = set(snapshot.authors)
    for p in papers:
        on_paper = [a for a in p["authors"] if a in retained]
        for a in on_paper:
            for b in on_paper:
                if a != b:
                    assert b in snapshot.coauthor_index[a]
        for d in p["datasets"]:
            for a in on_paper:
                assert a in snapshot.dataset_user_index[d]
    # reverse: every indexed pair must appear on some paper
    for a, partners in snapshot.coauthor_index.items():
        for b in partners:
            assert any(a in p["authors"] and b in p["authors"] for p in papers)


def test_filtered_author_keeps_byline_position(snapshot):
    assert snapshot.papers["p3"].author_ids == ("a1", "a6")


def test_validate_clean_snapshot(snapshot):
    assert validate_snapshot(snapshot) == []


def test_validate_detects_asymmetric_edge(snapshot):
    broken = CorpusSnapshot(
        papers=snapshot.papers,
        authors=snapshot.authors,
        datasets=snapshot.datasets,
        coauthor_index={"a1": frozenset({"a2"}), "a2": frozenset()},
        dataset_user_index=snapshot.dataset_user_index,
        author_paper_index=snapshot.author_paper_index,
        publication_count=snapshot.publication_count,
    )
    violations = validate_snapshot(broken)
    assert any("asymmetric" in v and "a1" in v and "a2" in v for v in violations)


def test_validate_detects_unknown_dataset(snapshot):
    paper = PaperRecord("px", "t", "", 2022, "", 0, ("a1",), frozenset({"ghost"}))
    broken = CorpusSnapshot(
        papers={**dict(snapshot.papers), "px": paper},
        authors=snapshot.authors,
        datasets=snapshot.datasets,
        coauthor_index=snapshot.coauthor_index,
        dataset_user_index=snapshot.dataset_user_index,
        author_paper_index=snapshot.author_paper_index,
        publication_count=snapshot.publication_count,
    )
    violations = validate_snapshot(broken)
    assert any("px" in v and "ghost" in v for v in violations)


def test_publication_count_equals_index_length(snapshot):
    for aid, pids in snapshot.author_paper_index.items():
        assert snapshot.publication_count[aid] == len(pids)


def test_coauthor_symmetry_and_irreflexivity(snapshot):
    for a, partners in snapshot.coauthor_index.items():
        assert a not in partners
        for b in partners:
            assert a in snapshot.coauthor_index[b]


def test_malformed_line_reports_line_number(tmp_path, fixture_dir):
    bad = tmp_path / "papers.jsonl"
    lines = (fixture_dir / "papers.jsonl").read_text().splitlines()
    lines[2] = '{"id": "p3", "title": "broken"'
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorpusError, match="line 3"):
        load_corpus(bad, fixture_dir / "authors.jsonl", fixture_dir / "datasets.jsonl")


def test_duplicate_id_aborts(tmp_path, fixture_dir):
    dup = tmp_path / "authors.jsonl"
    content = (fixture_dir / "authors.jsonl").read_text()
    dup.write_text(content + '{"id": "a1", "name": "Clone"}\n')
    with pytest.raises(CorpusError, match="duplicate author id"):
        load_corpus(fixture_dir / "papers.jsonl", dup, fixture_dir / "datasets.jsonl")


def test_dangling_dataset_aborts(tmp_path, fixture_dir):
    bad = tmp_path / "papers.jsonl"
    content = (fixture_dir / "papers.jsonl").read_text().replace('"datasets": ["d1"]', '"datasets": ["dX"]', 1)
    bad.write_text(content)
    with pytest.raises(CorpusError, match="unknown dataset"):
        load_corpus(bad, fixture_dir / "authors.jsonl", fixture_dir / "datasets.jsonl")


def test_paper_invariants_enforced():
    with pytest.raises(CorpusError, match="duplicate author"):
        PaperRecord("p", "t", "", 2020, "", 0, ("a", "a"), frozenset())
    with pytest.raises(CorpusError, match="year"):
        PaperRecord("p", "t", "", 1800, "", 0, ("a",), frozenset())
    with pytest.raises(CorpusError, match="citation"):
        PaperRecord("p", "t", "", 2020, "", -1, ("a",), frozenset())
    with pytest.raises(CorpusError, match="empty author"):
        PaperRecord("p", "t", "", 2020, "", 0, (), frozenset())


def test_unknown_keys_ignored(tmp_path, fixture_dir):
    extra = tmp_path / "datasets.jsonl"
    extra.write_text('{"id": "d1", "name": "D", "description": "", "extra_key": 42}\n')
    papers = tmp_path / "papers.jsonl"
    papers.write_text('{"id": "p1", "title": "t", "abstract": "", "year": 2022, "journal": "", "citations": 0, "authors": ["a1"], "datasets": ["d1"]}\n')
    authors = tmp_path / "authors.jsonl"
    authors.write_text('{"id": "a1", "name": "A", "unused": true}\n')
    snap = load_corpus(papers, authors, extra)
    assert "d1" in snap.datasets


def test_reload_is_byte_identical(fixture_dir):
    args = (
        fixture_dir / "papers.jsonl",
        fixture_dir / "authors.jsonl",
        fixture_dir / "datasets.jsonl",
    )
    first = snapshot_to_json(load_corpus(*args))
    second = snapshot_to_json(load_corpus(*args))
    assert first == second


def test_coauthor_sets_smaller_than_author_universe(snapshot):
    universe = len(snapshot.authors) + len(snapshot.removed_author_ids)
    for partners in snapshot.coauthor_index.values():
        assert len(partners) < universe
