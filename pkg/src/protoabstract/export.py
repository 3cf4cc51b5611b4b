"""Formal dependency table and predicate frequency report."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import torch

from .dataset.align import align_to_subwords, collapse_to_words
from .dataset.examples import SEPARATOR, AnnotatedExample, _runs
from .dataset.labels import IDENTIFIER_LABELS, FormalPropertyLabelMap
from .errors import IOFailure
from .srt.catalog import DEFAULT_CATALOG, PredicateCatalog

COLUMNS = ("identifier0", "identifier1", "predicate", "category", "sentence_id", "mode", "confidence")
GOLD = "gold-annotation"
PREDICTION = "model-prediction"


@dataclass(frozen=True)
class FormalDependencyRecord:
    identifier0: str
    identifier1: str
    predicate: str
    category: str
    sentence_id: str
    mode: str = GOLD
    confidence: float | None = None

    def __post_init__(self):
        expected = DEFAULT_CATALOG.category(self.predicate)
        if self.category != expected:
            raise ValueError(f"{self.predicate!r} belongs to {expected}, not {self.category}")
        if self.mode == PREDICTION:
            if self.confidence is None or not 0.0 < self.confidence <= 1.0:
                raise ValueError(f"prediction confidence must be in (0, 1], got {self.confidence}")
        elif self.mode == GOLD:
            if self.confidence is not None:
                raise ValueError("gold records carry no confidence")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def make(cls, identifier0, identifier1, predicate, sentence_id, confidence=None,
             catalog: PredicateCatalog = DEFAULT_CATALOG):
        mode = GOLD if confidence is None else PREDICTION
        return cls(identifier0, identifier1, predicate, catalog.category(predicate), sentence_id, mode, confidence)

    def row(self) -> dict:
        return {
            "identifier0": self.identifier0,
            "identifier1": self.identifier1,
            "predicate": self.predicate,
            "category": self.category,
            "sentence_id": self.sentence_id,
            "mode": self.mode,
            "confidence": "" if self.confidence is None else repr(self.confidence),
        }

    @classmethod
    def from_row(cls, row: dict) -> "FormalDependencyRecord":
        conf = row.get("confidence")
        return cls(
            identifier0=row["identifier0"],
            identifier1=row["identifier1"],
            predicate=row["predicate"],
            category=row["category"],
            sentence_id=row["sentence_id"],
            mode=row["mode"],
            confidence=None if conf in ("", None) else float(conf),
        )


def export_dependency_table(records: Iterable[FormalDependencyRecord], path, fmt: str = "csv") -> int:
    """Write records in a fixed column order; confidences use the shortest
    repr that round-trips, so import gives back equal records."""
    n = 0
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            if fmt == "csv":
                w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
                w.writeheader()
                for rec in records:
                    w.writerow(rec.row())
                    n += 1
            elif fmt == "jsonl":
                for rec in records:
                    row = rec.row()
                    row["confidence"] = rec.confidence
                    fh.write(json.dumps(row, ensure_ascii=False) + "\n")
                    n += 1
            else:
                raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise IOFailure(f"cannot write dependency table {path}: {exc}") from exc
    return n


def import_dependency_table(path, fmt: str = "csv") -> list[FormalDependencyRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            if fmt == "csv":
                return [FormalDependencyRecord.from_row(r) for r in csv.DictReader(fh)]
            return [FormalDependencyRecord.from_row(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise IOFailure(f"cannot read dependency table {path}: {exc}") from exc


def _span_text(words: Sequence[str], labels: Sequence[int], label: int) -> str | None:
    runs = _runs(labels, label)
    if not runs:
        return None
    s, e = runs[0]
    return " ".join(words[s:e])


def gold_records(examples: Iterable[AnnotatedExample], fp_map: FormalPropertyLabelMap) -> list[FormalDependencyRecord]:
    out = []
    for ex in examples:
        out.append(FormalDependencyRecord.make(
            _span_text(ex.words, ex.identifier_labels, IDENTIFIER_LABELS["identifier0"]),
            _span_text(ex.words, ex.identifier_labels, IDENTIFIER_LABELS["identifier1"]),
            fp_map.word(ex.gold_relation_id),
            ex.sentence_id,
        ))
    return out


@torch.no_grad()
def prediction_records(model, examples: Iterable[AnnotatedExample], tokenizer,
                       fp_map: FormalPropertyLabelMap, use_gold_position: bool = True) -> list[FormalDependencyRecord]:
    """Records read off model predictions on the sentence part of each example.

    The predicate is the FP label at the gold relation word (or, without it,
    at the sentence word with the most confident non-``O`` prediction); its
    softmax probability is the confidence. Examples where the model finds no
    identifier0, no identifier1 or predicts ``O`` there yield no record.
    """
    model.eval()
    out = []
    for ex in examples:
        mre = align_to_subwords(ex, tokenizer, model.cfg.max_seq_len)
        ids = torch.tensor([mre.input_ids])
        idf_logits, fp_logits = model(ids, torch.ones_like(ids))
        idf_pred = collapse_to_words(mre, idf_logits[0].argmax(-1).tolist())
        fp_prob = torch.softmax(fp_logits[0], dim=-1)
        word_prob = collapse_to_words(mre, fp_prob)
        n_sent = ex.words.index(SEPARATOR) if SEPARATOR in ex.words else len(ex.words)
        words, idf_pred, word_prob = ex.words[:n_sent], idf_pred[:n_sent], word_prob[:n_sent]
        if use_gold_position and ex.relation_index < n_sent:
            pos = ex.relation_index
        else:
            pos = max(range(n_sent), key=lambda i: float(word_prob[i][1:].max()))
        label = int(word_prob[pos].argmax())
        src = _span_text(words, idf_pred, IDENTIFIER_LABELS["identifier0"])
        tgt = _span_text(words, idf_pred, IDENTIFIER_LABELS["identifier1"])
        if label == 0 or src is None or tgt is None:
            continue
        out.append(FormalDependencyRecord.make(src, tgt, fp_map.word(label), ex.sentence_id,
                                               confidence=float(word_prob[pos][label])))
    return out


def summarize_catalog(examples: Sequence[AnnotatedExample], fp_map: FormalPropertyLabelMap) -> list[dict]:
    """Per-predicate counts with assigned ids, most frequent first (ties by id)."""
    if not examples:
        raise ValueError("cannot summarize an empty dataset")
    counts = Counter(fp_map.word(ex.gold_relation_id) for ex in examples)
    rows = [
        {"predicate": w, "id": fp_map[w], "count": c, "category": DEFAULT_CATALOG.category(w)}
        for w, c in counts.items()
    ]
    return sorted(rows, key=lambda r: (-r["count"], r["id"]))
