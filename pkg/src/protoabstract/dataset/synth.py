"""Learnable synthetic corpus for desk-scale training runs.

Identifiers are camel-case names assembled from protocol-flavoured
morphemes, so they are distinguishable from the lowercase filler words
around them. Predicate frequencies are allotted exactly (largest remainder)
rather than sampled, then shuffled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..srt.catalog import DEFAULT_CATALOG
from ..srt.extract import Span, SRTTriple
from ..srt.lemma import INFLECTIONS
from .examples import AnnotatedExample, annotate
from .labels import FormalPropertyLabelMap

# Observed counts for three predicates; the other twenty share the rest of
# the 1486-group corpus evenly.
OBSERVED_COUNTS = {"include": 620, "contain": 327, "utilize": 10}
CORPUS_GROUPS = 1486


def default_predicate_weights() -> dict[str, float]:
    others = [w for w in DEFAULT_CATALOG.words if w not in OBSERVED_COUNTS]
    rest = (CORPUS_GROUPS - sum(OBSERVED_COUNTS.values())) / len(others)
    weights = {w: float(OBSERVED_COUNTS.get(w, rest)) for w in DEFAULT_CATALOG.words}
    return weights


_HEADS = ["RRC", "meas", "report", "cell", "master", "secondary", "SIB", "PDCP", "RLC", "MAC",
          "srb", "drb", "nas", "security", "sp", "phy", "bwp", "csi", "ssb", "pucch", "rach",
          "paging", "sidelink", "serving"]
_PARTS = ["Config", "Group", "Setup", "Request", "Reconfiguration", "Info", "Capability", "List",
          "Id", "Mode", "Index", "Resource", "Timer", "Release", "Complete", "Cell", "Key", "Counter",
          "Object", "Result", "Set", "Parameters", "Bearer", "Status"]
_FILLER = ["the", "network", "when", "procedure", "upon", "reception", "of", "message", "field",
           "value", "if", "present", "otherwise", "and", "for", "each", "entry", "in", "this", "case",
           "is", "applied", "by", "lower", "layers", "configured", "indicated", "corresponding",
           "to", "a", "current", "that", "with", "on", "serving", "frequency", "as", "specified"]
_LEADS = [
    ["upon", "reception", "of", "the", "{D}", ","],
    ["if", "the", "{D}", "is", "present", ","],
    ["when", "the", "UE", "receives", "the", "{D}", ","],
    ["for", "each", "{D}", "entry", ","],
]
_TAILS = [
    ["as", "specified", "in", "{D}"],
    ["for", "the", "{D}"],
    ["after", "the", "{D}", "is", "received"],
    ["in", "the", "current", "{D}"],
]


@dataclass
class SynthConfig:
    n: int = 500
    n_identifiers: int = 80
    predicate_weights: dict[str, float] = field(default_factory=default_predicate_weights)
    # exact per-predicate counts; when given, overrides n and predicate_weights
    predicate_counts: dict[str, int] | None = None
    min_words: int = 6
    max_words: int = 30
    distractor_rate: float = 0.3
    append_triple: bool = True


def identifier_vocabulary(rng: np.random.Generator, size: int) -> list[str]:
    names: list[str] = []
    seen = set()
    while len(names) < size:
        parts = [_HEADS[rng.integers(len(_HEADS))]]
        parts += [_PARTS[i] for i in rng.integers(len(_PARTS), size=int(rng.integers(1, 3)))]
        name = "".join(parts)
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def allot(weights: dict[str, float], n: int) -> dict[str, int]:
    """Integer counts summing to ``n``, proportional to ``weights`` (largest remainder)."""
    keys = list(weights)
    w = np.array([weights[k] for k in keys], dtype=float)
    if n < 0 or w.sum() <= 0 or (w < 0).any():
        raise ValueError("weights must be non-negative with positive sum, n >= 0")
    quota = w / w.sum() * n
    counts = np.floor(quota).astype(int)
    remainder = n - counts.sum()
    # ties go to the earlier key
    order = sorted(range(len(keys)), key=lambda i: (-(quota[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return {k: int(c) for k, c in zip(keys, counts)}


def _fill(template, rng, identifiers, exclude):
    out = []
    for tok in template:
        if tok == "{D}":
            choice = identifiers[rng.integers(len(identifiers))]
            while choice in exclude:
                choice = identifiers[rng.integers(len(identifiers))]
            out.append(choice)
        else:
            out.append(tok)
    return out


def _sentence(rng, lemma, identifiers, cfg: SynthConfig):
    src, tgt = rng.choice(len(identifiers), size=2, replace=False)
    src, tgt = identifiers[src], identifiers[tgt]
    verb = INFLECTIONS[lemma][0]
    words: list[str] = []
    if rng.random() < cfg.distractor_rate:
        words += _fill(_LEADS[rng.integers(len(_LEADS))], rng, identifiers, {src, tgt})
    if lemma != "=" and rng.random() < 0.7:
        words.append("The" if not words else "the")
    s_pos = len(words)
    words.append(src)
    v_pos = len(words)
    words.append(verb)
    if lemma != "=" and rng.random() < 0.6:
        words.append("the")
    t_pos = len(words)
    words.append(tgt)
    if rng.random() < cfg.distractor_rate:
        words += _fill(_TAILS[rng.integers(len(_TAILS))], rng, identifiers, {src, tgt})
    target_len = int(rng.integers(cfg.min_words, cfg.max_words + 1))
    while len(words) < target_len:
        words.append(_FILLER[rng.integers(len(_FILLER))])
    return words, s_pos, v_pos, t_pos


def generate_synthetic_corpus(cfg: SynthConfig | None = None, seed: int = 0) -> list[AnnotatedExample]:
    """Deterministic for a fixed ``(cfg, seed)``.

    The formal-property ids follow first appearance in the generated order;
    ``FormalPropertyLabelMap.from_corpus(ex.predicate for ex in corpus)``
    rebuilds the same map.
    """
    cfg = cfg or SynthConfig()
    rng = np.random.default_rng(seed)
    if cfg.predicate_counts is not None:
        counts = {k: int(v) for k, v in cfg.predicate_counts.items() if v}
    else:
        counts = allot(cfg.predicate_weights, cfg.n)
    unknown = set(counts) - set(DEFAULT_CATALOG.words)
    if unknown:
        raise ValueError(f"not catalog predicates: {sorted(unknown)}")
    lemmas = [lem for lem, c in counts.items() for _ in range(c)]
    lemmas = [lemmas[i] for i in rng.permutation(len(lemmas))]
    fp_map = FormalPropertyLabelMap.from_corpus(lemmas)
    identifiers = identifier_vocabulary(rng, cfg.n_identifiers)

    corpus = []
    for i, lemma in enumerate(lemmas):
        words, s, v, t = _sentence(rng, lemma, identifiers, cfg)
        triple = SRTTriple(
            source=Span(words[s], s, s + 1),
            relation=Span(words[v], v, v + 1),
            lemma=lemma,
            target=Span(words[t], t, t + 1),
            sentence_id=f"synth-{i:05d}",
            sentence_text=" ".join(words),
            tokens=tuple(words),
        )
        corpus.append(annotate(triple, fp_map, cfg.append_triple))
    return corpus
