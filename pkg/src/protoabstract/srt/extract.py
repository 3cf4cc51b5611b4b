"""Source-relation-target triples from dependency parses, and the funnel filters."""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from typing import Iterable, Sequence

from .catalog import DEFAULT_CATALOG, PredicateCatalog
from .lemma import lemmatize
from .parsing import ParsedSentence

SUBJECT_LABELS = ("nsubj",)
OBJECT_LABELS = ("obj", "dobj")
OBLIQUE_LABELS = ("obl", "nmod")


@dataclass(frozen=True)
class Span:
    surface: str
    start: int
    end: int  # exclusive

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class SRTTriple:
    source: Span
    relation: Span
    lemma: str
    target: Span
    sentence_id: str
    sentence_text: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        n = len(self.tokens)
        spans = (self.source, self.relation, self.target)
        for sp in spans:
            if not 0 <= sp.start < sp.end <= n:
                raise ValueError(f"{self.sentence_id}: span {sp} outside sentence of {n} tokens")
        if self.lemma != self.lemma.lower():
            raise ValueError(f"relation lemma must be lowercase: {self.lemma!r}")

    def to_dict(self) -> dict:
        return {
            "source": self.source.surface,
            "relation": self.relation.surface,
            "lemma": self.lemma,
            "target": self.target.surface,
            "sentence": self.sentence_text,
            "spans": {
                "source": [self.source.start, self.source.end],
                "relation": [self.relation.start, self.relation.end],
                "target": [self.target.start, self.target.end],
            },
            "sentence_id": self.sentence_id,
            "tokens": list(self.tokens),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SRTTriple":
        sp = obj["spans"]
        tokens = tuple(obj.get("tokens") or obj["sentence"].split())
        return cls(
            source=Span(obj["source"], *sp["source"]),
            relation=Span(obj["relation"], *sp["relation"]),
            lemma=obj["lemma"],
            target=Span(obj["target"], *sp["target"]),
            sentence_id=str(obj.get("sentence_id", "")),
            sentence_text=obj["sentence"],
            tokens=tokens,
        )


def _triple(parsed: ParsedSentence, s: int, v: int, o: int) -> SRTTriple:
    tok = parsed.tokens
    return SRTTriple(
        source=Span(tok[s], s, s + 1),
        relation=Span(tok[v], v, v + 1),
        lemma=lemmatize(tok[v]),
        target=Span(tok[o], o, o + 1),
        sentence_id=parsed.sentence_id,
        sentence_text=parsed.text,
        tokens=parsed.tokens,
    )


def extract_srt(parsed: ParsedSentence, prepositional: bool = False, copula: bool = False) -> list[SRTTriple]:
    """One triple per subject-verb-object pattern in the parse.

    Sources and targets are the head words of the subject and object. With
    ``prepositional`` a verb lacking a direct object may take an oblique
    instead; with ``copula`` ``X is Y`` yields ``(X, is, Y)``. Both are off by
    default.
    """
    triples = []
    for v in range(len(parsed.tokens)):
        subjects = parsed.children(v, *SUBJECT_LABELS)
        if not subjects:
            continue
        objects = parsed.children(v, *OBJECT_LABELS)
        if not objects and prepositional:
            objects = parsed.children(v, *OBLIQUE_LABELS)
        for s in subjects:
            for o in objects:
                if len({s, v, o}) == 3:
                    triples.append(_triple(parsed, s, v, o))
        if copula:
            for c in parsed.children(v, "cop"):
                for s in subjects:
                    if len({s, c, v}) == 3:
                        triples.append(_triple(parsed, s, c, v))
    return triples


def head_key(surface: str) -> str:
    return surface.strip(string.punctuation)


def filter_by_lexicon(triples: Iterable[SRTTriple], lexicon) -> list[SRTTriple]:
    """Keep triples whose source and target head words are lexicon terms (case-sensitive)."""
    return [
        t for t in triples
        if head_key(t.source.surface) in lexicon and head_key(t.target.surface) in lexicon
    ]


def filter_by_predicate(triples: Iterable[SRTTriple], catalog: PredicateCatalog = DEFAULT_CATALOG) -> list[SRTTriple]:
    return [t for t in triples if t.lemma in catalog]


def filter_triples(triples: Sequence[SRTTriple], lexicon, catalog: PredicateCatalog = DEFAULT_CATALOG) -> list[SRTTriple]:
    return filter_by_predicate(filter_by_lexicon(triples, lexicon), catalog)


def write_triples_jsonl(triples: Iterable[SRTTriple], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in triples:
            fh.write(json.dumps(t.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_triples_jsonl(path) -> list[SRTTriple]:
    with open(path, encoding="utf-8") as fh:
        return [SRTTriple.from_dict(json.loads(line)) for line in fh if line.strip()]
