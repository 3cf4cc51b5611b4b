import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protoabstract.ingest import (
    FilterConfig,
    TableGrid,
    TermCandidates,
    TerminologyLexicon,
    build_lexicon,
    cell_tokens,
    collect_table_terms,
    hierarchical_filter,
    provenance_path,
    read_lexicon,
    read_tables_jsonl,
    write_lexicon,
    write_tables_jsonl,
)


def test_cell_tokens_keep_identifiers_whole():
    assert cell_tokens("masterCellGroup, RRC-Setup (T300).") == ["masterCellGroup", "RRC-Setup", "T300"]
    assert cell_tokens("  ") == []
    assert cell_tokens("measurement  configuration", split_phrases=False) == ["measurement configuration"]


def test_table_grid_validation():
    with pytest.raises(TypeError):
        TableGrid([["a", 3]], "doc")
    with pytest.raises(ValueError):
        TableGrid([["a"]], "doc", page=0)


def test_worked_example_table():
    table = TableGrid([["Field", "Description"], ["masterCellGroup", "the cell group of the MCG"]], "doc", 5)
    cands = collect_table_terms([table])
    assert cands.counts["the"] == 2
    lex = hierarchical_filter(cands, FilterConfig(domain_exclude_list={"group"}))
    assert lex.terms == {"Field", "Description", "masterCellGroup", "cell", "MCG"}
    assert lex.provenance["masterCellGroup"] == [("doc", 5, 0)]


def test_candidate_multiset_matches_naive_count(fixtures_dir):
    tables = read_tables_jsonl(fixtures_dir / "tables.jsonl")
    naive = Counter()
    for line in (fixtures_dir / "tables.jsonl").read_text().splitlines():
        for row in json.loads(line)["rows"]:
            for cell in row:
                for w in cell.split():
                    w = w.strip(".,;:()")
                    if w:
                        naive[w] += 1
    cands = collect_table_terms(tables)
    assert cands.counts == naive
    assert cands.size() == 71 and cands.types() == 54


def test_fixture_lexicon_size(fixtures_dir, golden_funnel):
    cfg = FilterConfig(domain_exclude_list={"weather", "network", "Configuration"})
    lex = build_lexicon(read_tables_jsonl(fixtures_dir / "tables.jsonl"), cfg)
    assert len(lex) == golden_funnel["terms"]
    assert "network" not in lex and "UE" in lex and "the" not in lex


def test_stop_list_is_normalised():
    cfg = FilterConfig(stop_list={"The", "..."})
    assert cfg.stop_list == {"the"}
    cands = TermCandidates(Counter({"THE": 1, "x": 1}), {"THE": [("d", 1, 0)], "x": [("d", 1, 0)]})
    assert hierarchical_filter(cands, cfg).terms == {"x"}


def test_case_sensitive_filter_keeps_other_cases():
    cands = collect_table_terms([TableGrid([["The", "the"]], "d")])
    lex = hierarchical_filter(cands, FilterConfig(stop_list={"the"}, casefold=False))
    assert lex.terms == {"The"}


def test_empty_tables_give_empty_lexicon():
    assert len(build_lexicon([])) == 0
    assert len(build_lexicon([TableGrid([], "d")])) == 0


def test_lexicon_terms_must_match_provenance():
    with pytest.raises(ValueError):
        TerminologyLexicon(frozenset({"a"}), {})


words = st.sampled_from(["the", "RRC", "Setup", "of", "cell", "MCG", "network", "and", "T300", "x-y", "(a)"])
cells = st.lists(words, min_size=0, max_size=4).map(" ".join)
grids = st.lists(st.lists(cells, min_size=1, max_size=3), min_size=0, max_size=4)
lists = st.frozensets(st.sampled_from(["the", "of", "cell", "network", "and", "mcg", "zzz"]))


@settings(max_examples=60, deadline=None)
@given(grids, lists, lists)
def test_filter_is_idempotent(rows, stop, domain):
    cfg = FilterConfig(stop_list=stop, domain_exclude_list=domain)
    once = hierarchical_filter(collect_table_terms([TableGrid(rows, "d")]), cfg)
    twice = hierarchical_filter(once, cfg)
    assert twice.terms == once.terms
    assert dict(twice.provenance) == dict(once.provenance)


@settings(max_examples=60, deadline=None)
@given(grids, lists, lists, lists)
def test_larger_lists_never_grow_the_lexicon(rows, stop, domain, extra):
    cands = collect_table_terms([TableGrid(rows, "d")])
    small = hierarchical_filter(cands, FilterConfig(stop_list=stop, domain_exclude_list=domain))
    big = hierarchical_filter(cands, FilterConfig(stop_list=stop | extra, domain_exclude_list=domain | extra))
    assert big.terms <= small.terms
    assert small.terms <= set(cands.counts)


def test_table_and_lexicon_round_trip(tmp_path, fixtures_dir):
    tables = read_tables_jsonl(fixtures_dir / "tables.jsonl")
    write_tables_jsonl(tables, tmp_path / "t.jsonl")
    assert read_tables_jsonl(tmp_path / "t.jsonl") == tables
    lex = build_lexicon(tables)
    write_lexicon(lex, tmp_path / "lex.txt")
    assert provenance_path(tmp_path / "lex.txt").exists()
    back = read_lexicon(tmp_path / "lex.txt")
    assert back.terms == lex.terms
    assert {k: [tuple(p) for p in v] for k, v in back.provenance.items()} == dict(lex.provenance)
