import json
from unittest import mock

import pytest
import requests

from protoabstract.errors import BackendUnavailable, ParseFailure
from protoabstract.srt import catalog as catalog_mod
from protoabstract.srt.catalog import CATEGORIES, DEFAULT_CATALOG, PredicateCatalog
from protoabstract.srt.extract import (
    SRTTriple,
    Span,
    extract_srt,
    filter_by_lexicon,
    filter_by_predicate,
    read_triples_jsonl,
    write_triples_jsonl,
)
from protoabstract.srt.lemma import INFLECTIONS, lemmatize
from protoabstract.srt.parsing import (
    CoreNLPBackend,
    FixtureBackend,
    ParsedSentence,
    corenlp_to_wire,
    parse_dependencies,
    parse_many,
)

CATALOG_TABLE = {
    "Confidentiality": {"decode", "encode"},
    "Integrity": {"verify"},
    "Authentication": {"access", "reestablish"},
    "Accounting": {"count"},
    "Belong": {"build", "complete", "append", "belong", "store", "contain", "include", "combine"},
    "Generation": {"imply", "establish", "modify", "denote", "utilize", "set", "change", "define", "="},
}


def wire(tokens, edges, pos=None):
    return {"tokens": tokens, "pos_tags": pos or ["X"] * len(tokens), "dep_edges": edges}


RRC = wire(["The", "RRCReconfiguration", "includes", "the", "masterCellGroup"],
           [[1, 0, "det"], [2, 1, "nsubj"], [-1, 2, "root"], [4, 3, "det"], [2, 4, "obj"]])


# -- catalog and lemmas ---------------------------------------------------------


def test_catalog_matches_table():
    assert len(DEFAULT_CATALOG) == 23
    assert set(CATEGORIES) == set(CATALOG_TABLE)
    for cat, words in CATALOG_TABLE.items():
        assert set(DEFAULT_CATALOG.words_in(cat)) == words
        for w in words:
            assert DEFAULT_CATALOG.category(w) == cat


def test_catalog_is_immutable():
    with pytest.raises(TypeError):
        DEFAULT_CATALOG.category_of["new"] = "Belong"
    with pytest.raises(ValueError):
        PredicateCatalog({"include": "Nonsense", **{w: c for w, c in DEFAULT_CATALOG.category_of.items() if w != "include"}})


@pytest.mark.parametrize("lemma", sorted(INFLECTIONS))
def test_every_inflection_maps_back(lemma):
    for form in (lemma, *INFLECTIONS[lemma]):
        assert lemmatize(form) == lemma
        assert lemmatize(form.capitalize()) == lemma


@pytest.mark.parametrize("form,lemma", [
    ("includes", "include"), ("included", "include"), ("verifies", "verify"), ("re-establishes", "reestablish"),
    ("utilises", "utilize"), ("sets", "set"), ("=", "="), ("schedules", "schedule"), ("sends", "send"),
    ("applies", "apply"), ("reaches", "reach"), ("stopped", "stop"), ("configured", "configure"),
])
def test_lemmatize_examples(form, lemma):
    assert lemmatize(form) == lemma


# -- parsing --------------------------------------------------------------------


def test_parsed_sentence_validation():
    ParsedSentence.from_dict(RRC, "s")
    with pytest.raises(ParseFailure):
        ParsedSentence.from_dict(wire(["a", "b"], [[-1, 0, "root"], [-1, 1, "root"]]), "two-roots")
    with pytest.raises(ParseFailure):
        ParsedSentence.from_dict(wire(["a"], [[-1, 0, "root"], [3, 0, "dep"]]), "out-of-range")
    with pytest.raises(ParseFailure):
        ParsedSentence.from_dict({"tokens": ["a"], "pos_tags": [], "dep_edges": [[-1, 0, "root"]]}, "pos")


def test_parse_rejects_empty_before_backend():
    backend = mock.Mock()
    for text in ("", "   "):
        with pytest.raises(ValueError):
            parse_dependencies(text, backend)
    backend.parse.assert_not_called()


def test_corenlp_response_conversion(fixtures_dir):
    doc = json.loads((fixtures_dir / "corenlp_response.json").read_text())
    out = corenlp_to_wire(doc)
    assert out["tokens"] == ["The", "RRCReconfiguration", "includes", "the", "masterCellGroup", "."]
    assert sorted(map(tuple, out["dep_edges"])) == sorted(
        [(-1, 2, "root"), (1, 0, "det"), (2, 1, "nsubj"), (4, 3, "det"), (2, 4, "obj"), (2, 5, "punct")])


def _session(status=200, payload=None, exc=None):
    session = mock.Mock()
    if exc is not None:
        session.post.side_effect = exc
    else:
        resp = mock.Mock(status_code=status)
        resp.json.return_value = payload
        session.post.return_value = resp
    return session


def test_corenlp_backend_round_trip(fixtures_dir):
    doc = json.loads((fixtures_dir / "corenlp_response.json").read_text())
    session = _session(payload=doc)
    backend = CoreNLPBackend("http://parser:9000", session=session)
    parsed = parse_dependencies("The RRCReconfiguration includes the masterCellGroup .", backend, "x")
    props = json.loads(session.post.call_args.kwargs["params"]["properties"])
    assert props["annotators"] == "tokenize,ssplit,pos,depparse"
    triple, = extract_srt(parsed)
    assert (triple.source.surface, triple.lemma, triple.target.surface) == ("RRCReconfiguration", "include", "masterCellGroup")


def test_corenlp_backend_errors():
    with pytest.raises(BackendUnavailable):
        CoreNLPBackend("http://x", session=_session(exc=requests.ConnectionError("refused"))).parse("a b")
    with pytest.raises(BackendUnavailable):
        CoreNLPBackend("http://x", session=_session(status=500)).parse("a b")
    with pytest.raises(ParseFailure):
        CoreNLPBackend("http://x", session=_session(payload={"sentences": []})).parse("a b")


def test_parse_many_skips_failures():
    backend = FixtureBackend([dict(RRC, text="known")])
    parsed, failures = parse_many([("a", "known"), ("b", "unknown")], backend)
    assert [p.sentence_id for p in parsed] == ["a"]
    assert failures[0]["sentence_id"] == "b" and failures[0]["error"] == "backend_unavailable"


# -- extraction -----------------------------------------------------------------


def test_extract_worked_example():
    triple, = extract_srt(ParsedSentence.from_dict(RRC, "s1"))
    assert (triple.source.surface, triple.relation.surface, triple.lemma, triple.target.surface) == \
        ("RRCReconfiguration", "includes", "include", "masterCellGroup")
    assert (triple.source.start, triple.relation.start, triple.target.start) == (1, 2, 4)


def test_fixture_triples_match_oracle(fixtures_dir, golden_funnel):
    backend = FixtureBackend.from_jsonl(fixtures_dir / "parses.jsonl")
    sentences = [json.loads(line) for line in (fixtures_dir / "sentences.jsonl").read_text().splitlines()]
    parsed, failures = parse_many([(s["id"], s["text"]) for s in sentences], backend)
    assert not failures
    raw = [t for p in parsed for t in extract_srt(p)]
    assert len(raw) == golden_funnel["raw_groups"]


def test_passive_and_copula_need_options():
    passive = ParsedSentence.from_dict(wire(["X", "is", "sent", "by", "Y"], [
        [2, 0, "nsubj:pass"], [2, 1, "aux:pass"], [-1, 2, "root"], [4, 3, "case"], [2, 4, "obl:agent"]]), "p")
    assert extract_srt(passive) == []
    cop = ParsedSentence.from_dict(wire(["X", "is", "Y"], [[2, 0, "nsubj"], [2, 1, "cop"], [-1, 2, "root"]]), "c")
    assert extract_srt(cop) == []
    t, = extract_srt(cop, copula=True)
    assert (t.source.surface, t.relation.surface, t.target.surface) == ("X", "is", "Y")
    obl = ParsedSentence.from_dict(wire(["X", "belongs", "to", "Y"], [
        [1, 0, "nsubj"], [-1, 1, "root"], [3, 2, "case"], [1, 3, "obl"]]), "o")
    assert extract_srt(obl) == []
    t, = extract_srt(obl, prepositional=True)
    assert (t.lemma, t.target.surface) == ("belong", "Y")


def test_filters():
    triple, = extract_srt(ParsedSentence.from_dict(RRC, "s1"))
    assert filter_by_lexicon([triple], {"RRCReconfiguration", "masterCellGroup"}) == [triple]
    assert filter_by_lexicon([triple], {"RRCReconfiguration", "mastercellgroup"}) == []
    assert filter_by_predicate([triple]) == [triple]
    other = SRTTriple(triple.source, triple.relation, "schedule", triple.target, "s1", triple.sentence_text, triple.tokens)
    assert filter_by_predicate([other]) == []


def test_triple_validation_and_round_trip(tmp_path):
    triple, = extract_srt(ParsedSentence.from_dict(RRC, "s1"))
    write_triples_jsonl([triple], tmp_path / "t.jsonl")
    assert read_triples_jsonl(tmp_path / "t.jsonl") == [triple]
    with pytest.raises(ValueError):
        SRTTriple(Span("a", 0, 9), triple.relation, "include", triple.target, "s", "", triple.tokens)
    assert Span("a", 0, 2).overlaps(Span("b", 1, 3)) and not Span("a", 0, 1).overlaps(Span("b", 1, 2))


def test_catalog_module_words_are_unique():
    words = [w for ws in catalog_mod._WORDS_BY_CATEGORY.values() for w in ws]
    assert len(words) == len(set(words)) == 23
