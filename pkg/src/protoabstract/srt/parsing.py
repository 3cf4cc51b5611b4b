"""Dependency-parse records and the adapters that produce them.

Any backend qualifies as long as it emits the ``ParsedSentence`` wire schema::

    {"sentence_id": "s1", "tokens": [...], "pos_tags": [...],
     "dep_edges": [[head, dependent, "label"], ...]}

Indices are 0-based; the root edge has head ``-1``.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Iterable, Protocol

import requests

from ..errors import BackendUnavailable, ParseFailure

log = logging.getLogger(__name__)

ROOT = -1
ENDPOINT_ENV = "PROTOABSTRACT_PARSER_URL"


@dataclass(frozen=True)
class ParsedSentence:
    sentence_id: str
    tokens: tuple[str, ...]
    pos_tags: tuple[str, ...]
    dep_edges: tuple[tuple[int, int, str], ...]

    def __post_init__(self):
        n = len(self.tokens)
        if n == 0:
            raise ParseFailure(f"{self.sentence_id}: no tokens")
        if len(self.pos_tags) != n:
            raise ParseFailure(f"{self.sentence_id}: {len(self.pos_tags)} POS tags for {n} tokens")
        roots = 0
        for head, dep, label in self.dep_edges:
            if not 0 <= dep < n or not (head == ROOT or 0 <= head < n):
                raise ParseFailure(f"{self.sentence_id}: edge ({head}, {dep}, {label}) out of range")
            roots += head == ROOT
        if roots != 1:
            raise ParseFailure(f"{self.sentence_id}: expected exactly one root edge, found {roots}")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def children(self, head: int, *labels: str) -> list[int]:
        return [d for h, d, lab in self.dep_edges if h == head and (not labels or lab in labels)]

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "tokens": list(self.tokens),
            "pos_tags": list(self.pos_tags),
            "dep_edges": [list(e) for e in self.dep_edges],
        }

    @classmethod
    def from_dict(cls, obj: dict, sentence_id: str | None = None) -> "ParsedSentence":
        try:
            return cls(
                sentence_id=str(sentence_id if sentence_id is not None else obj["sentence_id"]),
                tokens=tuple(str(t) for t in obj["tokens"]),
                pos_tags=tuple(str(p) for p in obj["pos_tags"]),
                dep_edges=tuple((int(h), int(d), str(lab)) for h, d, lab in obj["dep_edges"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseFailure(f"malformed parse record: {exc}") from exc


class ParserBackend(Protocol):
    def parse(self, text: str) -> dict:
        """Return one sentence in the wire schema (``sentence_id`` optional)."""


class CoreNLPBackend:
    """Client for a running CoreNLP server (``tokenize,ssplit,pos,depparse``).

    The endpoint defaults to ``$PROTOABSTRACT_PARSER_URL`` and then
    ``http://localhost:9000``. Requests are independent, so one instance can be
    shared between threads.
    """

    def __init__(self, url: str | None = None, timeout: float = 30.0, session=None):
        self.url = url or os.environ.get(ENDPOINT_ENV, "http://localhost:9000")
        self.timeout = timeout
        self.session = session or requests.Session()

    def parse(self, text: str) -> dict:
        props = {
            "annotators": "tokenize,ssplit,pos,depparse",
            "outputFormat": "json",
            "ssplit.isOneSentence": "true",
        }
        try:
            resp = self.session.post(
                self.url,
                params={"properties": json.dumps(props)},
                data=text.encode("utf-8"),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"CoreNLP at {self.url} unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnavailable(f"CoreNLP at {self.url} returned HTTP {resp.status_code}")
        try:
            return corenlp_to_wire(resp.json())
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ParseFailure(f"unexpected CoreNLP response: {exc}") from exc


def corenlp_to_wire(doc: dict) -> dict:
    """Convert CoreNLP JSON output (1-based, governor 0 = ROOT) to the wire schema."""
    sent = doc["sentences"][0]
    tokens = [t["word"] for t in sent["tokens"]]
    pos = [t["pos"] for t in sent["tokens"]]
    deps = sent.get("basicDependencies") or sent["enhancedPlusPlusDependencies"]
    edges = [[d["governor"] - 1, d["dependent"] - 1, d["dep"].lower()] for d in deps]
    return {"tokens": tokens, "pos_tags": pos, "dep_edges": edges}


class FixtureBackend:
    """Serves pre-computed parses keyed by sentence text (golden fixtures)."""

    def __init__(self, records: Iterable[dict]):
        self._by_text = {}
        for rec in records:
            text = rec.get("text") or " ".join(rec["tokens"])
            self._by_text[text] = rec

    @classmethod
    def from_jsonl(cls, path) -> "FixtureBackend":
        with open(path, encoding="utf-8") as fh:
            return cls(json.loads(line) for line in fh if line.strip())

    def parse(self, text: str) -> dict:
        try:
            return self._by_text[text]
        except KeyError:
            raise BackendUnavailable(f"no fixture parse for sentence {text[:60]!r}") from None


def parse_dependencies(sentence: str, backend: ParserBackend, sentence_id: str = "") -> ParsedSentence:
    if not sentence or not sentence.strip():
        raise ValueError("sentence must be non-empty")
    raw = backend.parse(sentence)
    if not isinstance(raw, dict):
        raise ParseFailure(f"{sentence_id}: backend returned {type(raw).__name__}, expected a JSON object")
    return ParsedSentence.from_dict(raw, sentence_id=sentence_id or raw.get("sentence_id", ""))


def parse_many(sentences: Iterable[tuple[str, str]], backend: ParserBackend) -> tuple[list[ParsedSentence], list[dict]]:
    """Parse ``(sentence_id, text)`` pairs; failing sentences are logged and skipped."""
    parsed, failures = [], []
    for sid, text in sentences:
        try:
            parsed.append(parse_dependencies(text, backend, sid))
        except (BackendUnavailable, ParseFailure) as exc:
            log.warning("sentence %s aborted: %s", sid, exc)
            failures.append({"sentence_id": sid, **exc.to_dict()})
    return parsed, failures
