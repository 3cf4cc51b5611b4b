"""Terminology mining from tables embedded in a protocol standard.

Tables arrive pre-extracted (one JSON object per table); every cell is split
into candidate terms, which then pass a two-stage filter: a generic stopword
list first, then a domain exclusion list supplied by experts.
"""

from __future__ import annotations

import json
import logging
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from .errors import IOFailure

log = logging.getLogger(__name__)

PUNCT = string.punctuation

Provenance = tuple[str, int, int]  # (doc, page, table index)


@dataclass(frozen=True)
class TableGrid:
    rows: list[list[str]]
    source_doc: str
    page: int = 1

    def __post_init__(self):
        if self.page < 1:
            raise ValueError(f"page must be >= 1, got {self.page}")
        for row in self.rows:
            for cell in row:
                if not isinstance(cell, str):
                    raise TypeError(f"table cell must be a string, got {type(cell).__name__}")

    def cells(self) -> Iterable[str]:
        for row in self.rows:
            yield from row


def normalize(term: str, casefold: bool = True, strip_punct: bool = True) -> str:
    if strip_punct:
        term = term.strip(PUNCT)
    return term.casefold() if casefold else term


@dataclass(frozen=True)
class FilterConfig:
    """Word lists for the two filter stages.

    Both lists are normalized with the same rules applied to candidates, so
    a stop list written as ``{"The"}`` still removes ``the``.
    """

    stop_list: frozenset[str] = frozenset(ENGLISH_STOP_WORDS)
    domain_exclude_list: frozenset[str] = frozenset()
    casefold: bool = True
    strip_punct: bool = True
    # False keeps each whole cell as a single candidate term
    split_phrases: bool = True

    def __post_init__(self):
        for name in ("stop_list", "domain_exclude_list"):
            words = {self.norm(w) for w in getattr(self, name)}
            words.discard("")
            object.__setattr__(self, name, frozenset(words))

    def norm(self, term: str) -> str:
        return normalize(term, self.casefold, self.strip_punct)


@dataclass
class TermCandidates:
    """Multiset of raw cell tokens with the tables each came from."""

    counts: Counter = field(default_factory=Counter)
    provenance: dict[str, list[Provenance]] = field(default_factory=dict)

    def size(self) -> int:
        return sum(self.counts.values())

    def types(self) -> int:
        return len(self.counts)


@dataclass
class TerminologyLexicon:
    terms: frozenset[str]
    provenance: Mapping[str, list[Provenance]]

    def __post_init__(self):
        if set(self.terms) != set(self.provenance):
            raise ValueError("lexicon terms and provenance keys differ")

    def __contains__(self, term: object) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)


def cell_tokens(cell: str, split_phrases: bool = True) -> list[str]:
    """Tokens of one cell: whitespace split, surrounding punctuation stripped.

    Internal camel-case, digits and hyphens survive (``RRC-Setup`` stays whole).
    """
    pieces = cell.split() if split_phrases else [" ".join(cell.split())]
    out = []
    for piece in pieces:
        tok = piece.strip(PUNCT)
        if tok:
            out.append(tok)
    return out


def collect_table_terms(tables: Iterable[TableGrid], split_phrases: bool = True) -> TermCandidates:
    cands = TermCandidates()
    for idx, table in enumerate(tables):
        where = (table.source_doc, table.page, idx)
        for cell in table.cells():
            for tok in cell_tokens(cell, split_phrases):
                cands.counts[tok] += 1
                prov = cands.provenance.setdefault(tok, [])
                if not prov or prov[-1] != where:
                    prov.append(where)
    return cands


def hierarchical_filter(candidates, cfg: FilterConfig) -> TerminologyLexicon:
    """Drop generic stopwords, then expert-excluded domain terms.

    Accepts ``TermCandidates`` or an existing ``TerminologyLexicon``, so the
    filter can be re-applied (it is idempotent).
    """
    kept: dict[str, list[Provenance]] = {}
    dropped_stop = dropped_domain = 0
    for term, prov in candidates.provenance.items():
        key = cfg.norm(term)
        if not key or key in cfg.stop_list:
            dropped_stop += 1
            continue
        if key in cfg.domain_exclude_list:
            dropped_domain += 1
            continue
        kept[term] = list(prov)
    log.debug("filter dropped %d stopword and %d domain types", dropped_stop, dropped_domain)
    return TerminologyLexicon(terms=frozenset(kept), provenance=kept)


def build_lexicon(tables: Iterable[TableGrid], cfg: FilterConfig | None = None) -> TerminologyLexicon:
    cfg = cfg or FilterConfig()
    return hierarchical_filter(collect_table_terms(tables, cfg.split_phrases), cfg)


# -- file formats -----------------------------------------------------------


def read_tables_jsonl(path) -> list[TableGrid]:
    tables = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                rows = [["" if c is None else str(c) for c in row] for row in obj["rows"]]
                tables.append(TableGrid(rows=rows, source_doc=str(obj["doc"]), page=int(obj.get("page", 1))))
    except OSError as exc:
        raise IOFailure(f"cannot read tables from {path}: {exc}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        raise IOFailure(f"{path}:{lineno}: malformed table record: {exc}") from exc
    return tables


def write_tables_jsonl(tables: Iterable[TableGrid], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in tables:
            fh.write(json.dumps({"doc": t.source_doc, "page": t.page, "rows": t.rows}) + "\n")


def provenance_path(lexicon_path) -> Path:
    p = Path(lexicon_path)
    return p.with_name(p.stem + ".provenance.json")


def write_lexicon(lexicon: TerminologyLexicon, path) -> Path:
    """One term per line (sorted) plus a JSON provenance sidecar."""
    path = Path(path)
    terms = sorted(lexicon.terms)
    try:
        path.write_text("".join(t + "\n" for t in terms), encoding="utf-8")
        side = provenance_path(path)
        side.write_text(
            json.dumps({t: [list(p) for p in lexicon.provenance[t]] for t in terms}, indent=1),
            encoding="utf-8",
        )
    except OSError as exc:
        raise IOFailure(f"cannot write lexicon to {path}: {exc}") from exc
    return side


def read_lexicon(path) -> TerminologyLexicon:
    path = Path(path)
    try:
        terms = [t for t in path.read_text(encoding="utf-8").split("\n") if t]
        side = provenance_path(path)
        raw = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    except OSError as exc:
        raise IOFailure(f"cannot read lexicon {path}: {exc}") from exc
    prov = {t: [tuple(p) for p in raw.get(t, [])] for t in terms}
    return TerminologyLexicon(terms=frozenset(terms), provenance=prov)
