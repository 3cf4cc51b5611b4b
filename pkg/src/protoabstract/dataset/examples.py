"""Word-level training examples built from filtered triples."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptySplit, SpanConflict
from ..srt.extract import SRTTriple
from .labels import IDENTIFIER_LABELS, FormalPropertyLabelMap

log = logging.getLogger(__name__)

SEPARATOR = "[SEP]"
MAX_WORDS = 200


def _runs(labels: Sequence[int], value: int) -> list[tuple[int, int]]:
    runs, start = [], None
    for i, lab in enumerate(list(labels) + [None]):
        if lab == value and start is None:
            start = i
        elif lab != value and start is not None:
            runs.append((start, i))
            start = None
    return runs


@dataclass
class AnnotatedExample:
    """Sentence words (optionally followed by the separator and the triple
    words) with one identifier label and one formal-property label per word."""

    words: list[str]
    identifier_labels: list[int]
    fp_labels: list[int]
    gold_relation_id: int
    sentence_id: str
    relation_index: int
    predicate: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.words)
        if len(self.identifier_labels) != n or len(self.fp_labels) != n:
            raise ValueError(f"{self.sentence_id}: label sequences do not align with {n} words")
        for lab in (IDENTIFIER_LABELS["identifier0"], IDENTIFIER_LABELS["identifier1"]):
            if len(_runs(self.identifier_labels, lab)) != 1:
                raise ValueError(f"{self.sentence_id}: need exactly one span labeled {lab}")
        if not any(self.fp_labels):
            raise ValueError(f"{self.sentence_id}: no formal-property word labeled")
        if self.fp_labels[self.relation_index] != self.gold_relation_id or self.gold_relation_id == 0:
            raise ValueError(f"{self.sentence_id}: relation index does not carry the gold id")

    def __len__(self) -> int:
        return len(self.words)

    def span(self, label: int) -> tuple[int, int]:
        return _runs(self.identifier_labels, label)[0]

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "words": self.words,
            "identifier_labels": self.identifier_labels,
            "fp_labels": self.fp_labels,
            "gold_relation_id": self.gold_relation_id,
            "relation_index": self.relation_index,
            "predicate": self.predicate,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AnnotatedExample":
        return cls(
            words=list(obj["words"]),
            identifier_labels=[int(x) for x in obj["identifier_labels"]],
            fp_labels=[int(x) for x in obj["fp_labels"]],
            gold_relation_id=int(obj["gold_relation_id"]),
            sentence_id=str(obj["sentence_id"]),
            relation_index=int(obj["relation_index"]),
            predicate=obj.get("predicate", ""),
            meta=obj.get("meta", {}),
        )


def annotate(triple: SRTTriple, fp_map: FormalPropertyLabelMap, append_triple: bool = True) -> AnnotatedExample:
    """Label the triple's source span 1, target span 2 and its relation word
    with the predicate id; the appended triple words are all ``O``."""
    src, rel, tgt = triple.source, triple.relation, triple.target
    if src.overlaps(tgt):
        raise SpanConflict(f"{triple.sentence_id}: source {src} overlaps target {tgt}")
    if rel.overlaps(src) or rel.overlaps(tgt):
        raise SpanConflict(f"{triple.sentence_id}: relation {rel} overlaps an identifier span")

    words = list(triple.tokens)
    idf = [0] * len(words)
    fp = [0] * len(words)
    for i in range(src.start, src.end):
        idf[i] = IDENTIFIER_LABELS["identifier0"]
    for i in range(tgt.start, tgt.end):
        idf[i] = IDENTIFIER_LABELS["identifier1"]
    fp_id = fp_map[triple.lemma]
    fp[rel.start] = fp_id

    if append_triple:
        tail = [SEPARATOR, src.surface, rel.surface, tgt.surface]
        words += tail
        idf += [0] * len(tail)
        fp += [0] * len(tail)

    return AnnotatedExample(
        words=words,
        identifier_labels=idf,
        fp_labels=fp,
        gold_relation_id=fp_id,
        sentence_id=triple.sentence_id,
        relation_index=rel.start,
        predicate=triple.lemma,
        meta={"source": src.surface, "target": tgt.surface, "relation": rel.surface},
    )


def annotate_all(triples: Iterable[SRTTriple], fp_map: FormalPropertyLabelMap, append_triple: bool = True):
    """Annotate every triple; span conflicts are logged and skipped."""
    out, rejected = [], 0
    for t in triples:
        try:
            out.append(annotate(t, fp_map, append_triple))
        except SpanConflict as exc:
            log.warning("triple rejected: %s", exc)
            rejected += 1
    return out, rejected


def length_filter(examples: Iterable[AnnotatedExample], max_words: int = MAX_WORDS) -> list[AnnotatedExample]:
    return [ex for ex in examples if len(ex.words) <= max_words]


def split_sizes(n: int, valid_fraction: float) -> tuple[int, int]:
    """``(n_train, n_valid)``: the validation side gets ``ceil(n * fraction)``
    clamped so both sides keep at least one example."""
    if not 0 < valid_fraction < 1:
        raise ValueError(f"valid_fraction must be in (0, 1), got {valid_fraction}")
    if n < 2:
        raise EmptySplit(f"cannot split {n} example(s) into two non-empty sides")
    n_valid = math.ceil(n * valid_fraction - 1e-9)
    n_valid = min(max(n_valid, 1), n - 1)
    return n - n_valid, n_valid


def split_dataset(examples: Sequence, valid_fraction: float = 0.2, seed: int = 0):
    n_train, _ = split_sizes(len(examples), valid_fraction)
    order = np.random.default_rng(seed).permutation(len(examples))
    shuffled = [examples[i] for i in order]
    return shuffled[:n_train], shuffled[n_train:]


def write_examples_jsonl(examples: Iterable[AnnotatedExample], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_examples_jsonl(path) -> list[AnnotatedExample]:
    with open(path, encoding="utf-8") as fh:
        return [AnnotatedExample.from_dict(json.loads(line)) for line in fh if line.strip()]
