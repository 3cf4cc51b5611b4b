"""Label vocabularies for the identifier and formal-property tasks."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable

from ..srt.catalog import DEFAULT_CATALOG, PredicateCatalog

# Continuation subwords and special tokens carry this; excluded from loss and metrics.
IGNORE = -100

O = "O"
IDENTIFIER_LABELS = {O: 0, "identifier0": 1, "identifier1": 2}
IDENTIFIER_NAMES = {v: k for k, v in IDENTIFIER_LABELS.items()}
NUM_IDENTIFIER_LABELS = len(IDENTIFIER_LABELS)
NUM_FP_LABELS = len(DEFAULT_CATALOG) + 1


class FormalPropertyLabelMap:
    """``O -> 0`` plus one id per catalog predicate.

    Ids are handed out in order of first appearance in a corpus; predicates
    never seen are appended in catalog order so the map always covers the
    whole catalog. Persist it with ``save`` and reload it for later runs.
    """

    def __init__(self, word_to_id: dict[str, int], catalog: PredicateCatalog = DEFAULT_CATALOG):
        if set(word_to_id) != set(catalog.words) | {O} or word_to_id.get(O) != 0:
            raise ValueError("label map must cover exactly O plus the catalog words, with O = 0")
        if sorted(word_to_id.values()) != list(range(len(catalog) + 1)):
            raise ValueError("label ids must be a permutation of 0..len(catalog)")
        self.word_to_id = dict(word_to_id)
        self.id_to_word = {i: w for w, i in self.word_to_id.items()}

    @classmethod
    def from_corpus(cls, lemmas: Iterable[str], catalog: PredicateCatalog = DEFAULT_CATALOG):
        order = {O: 0}
        for lemma in list(lemmas) + list(catalog.words):
            if lemma in catalog and lemma not in order:
                order[lemma] = len(order)
        return cls(order, catalog)

    def __len__(self) -> int:
        return len(self.word_to_id)

    def __getitem__(self, word: str) -> int:
        return self.word_to_id[word]

    def word(self, label_id: int) -> str:
        return self.id_to_word[label_id]

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalPropertyLabelMap) and self.word_to_id == other.word_to_id

    def to_json(self) -> str:
        ordered = sorted(self.word_to_id.items(), key=lambda kv: kv[1])
        return json.dumps(dict(ordered), indent=1, ensure_ascii=False)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()[:16]

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path, catalog: PredicateCatalog = DEFAULT_CATALOG):
        return cls({w: int(i) for w, i in json.loads(Path(path).read_text(encoding="utf-8")).items()}, catalog)


def save_identifier_map(path) -> None:
    Path(path).write_text(json.dumps(IDENTIFIER_LABELS, indent=1) + "\n", encoding="utf-8")
