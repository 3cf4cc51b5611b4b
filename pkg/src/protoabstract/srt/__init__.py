from .catalog import CATEGORIES, DEFAULT_CATALOG, PredicateCatalog
from .extract import (
    Span,
    SRTTriple,
    extract_srt,
    filter_by_lexicon,
    filter_by_predicate,
    filter_triples,
    read_triples_jsonl,
    write_triples_jsonl,
)
from .lemma import lemmatize
from .parsing import (
    CoreNLPBackend,
    FixtureBackend,
    ParsedSentence,
    parse_dependencies,
    parse_many,
)

__all__ = [
    "CATEGORIES", "DEFAULT_CATALOG", "PredicateCatalog", "Span", "SRTTriple",
    "extract_srt", "filter_by_lexicon", "filter_by_predicate", "filter_triples",
    "read_triples_jsonl", "write_triples_jsonl", "lemmatize", "CoreNLPBackend",
    "FixtureBackend", "ParsedSentence", "parse_dependencies", "parse_many",
]
