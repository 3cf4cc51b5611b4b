"""Pipeline stages over files in one output directory.

Each stage reads the previous stage's artifacts, writes its own plus a
``*_counts.json`` file, and returns those counts. ``funnel`` gathers the
counts into the stage-by-stage summary printed by ``report``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .dataset.examples import (
    MAX_WORDS,
    annotate_all,
    length_filter,
    read_examples_jsonl,
    split_dataset,
    write_examples_jsonl,
)
from .dataset.labels import FormalPropertyLabelMap, save_identifier_map
from .dataset.synth import SynthConfig, generate_synthetic_corpus
from .ingest import FilterConfig, build_lexicon, collect_table_terms, read_lexicon, read_tables_jsonl, write_lexicon
from .srt.catalog import DEFAULT_CATALOG
from .srt.extract import extract_srt, filter_by_lexicon, filter_by_predicate, read_triples_jsonl, write_triples_jsonl
from .srt.parsing import parse_many

log = logging.getLogger(__name__)

FUNNEL_STAGES = ("tables", "terms", "raw_groups", "lexicon_filtered", "predicate_filtered", "length_filtered")


@dataclass
class DatasetOptions:
    max_words: int = MAX_WORDS
    max_seq_len: int = 256
    valid_fraction: float = 0.2
    seed: int = 0
    append_triple: bool = True


@dataclass
class ExtractOptions:
    prepositional: bool = False
    copula: bool = False


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def run_ingest(tables_path, out_dir, cfg: FilterConfig | None = None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = cfg or FilterConfig()
    tables = read_tables_jsonl(tables_path)
    cands = collect_table_terms(tables, cfg.split_phrases)
    lexicon = build_lexicon(tables, cfg)
    write_lexicon(lexicon, out / "lexicon.txt")
    counts = {
        "tables": len(tables),
        "cells": sum(1 for t in tables for _ in t.cells()),
        "candidate_tokens": cands.size(),
        "candidate_types": cands.types(),
        "terms": len(lexicon),
    }
    _dump(out / "ingest_counts.json", counts)
    return counts


def read_sentences(path) -> list[tuple[str, str]]:
    """``(sentence_id, text)`` from JSON Lines (``id``/``text``) or one sentence per line."""
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if path.suffix == ".jsonl":
        out = []
        for i, ln in enumerate(lines, 1):
            obj = json.loads(ln)
            out.append((str(obj.get("id", obj.get("sentence_id", f"s{i}"))), obj["text"]))
        return out
    return [(f"s{i}", ln.strip()) for i, ln in enumerate(lines, 1)]


def run_extract(sentences_path, lexicon_path, out_dir, backend, opts: ExtractOptions | None = None, catalog=None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = opts or ExtractOptions()
    catalog = catalog or DEFAULT_CATALOG
    sentences = read_sentences(sentences_path)
    lexicon = read_lexicon(lexicon_path)
    parsed, failures = parse_many(sentences, backend)
    with open(out / "parsed.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for p in parsed:
            fh.write(json.dumps(p.to_dict(), ensure_ascii=False) + "\n")
    raw = [t for p in parsed for t in extract_srt(p, opts.prepositional, opts.copula)]
    by_lexicon = filter_by_lexicon(raw, lexicon)
    by_predicate = filter_by_predicate(by_lexicon, catalog)
    write_triples_jsonl(raw, out / "triples.raw.jsonl")
    write_triples_jsonl(by_lexicon, out / "triples.lexicon.jsonl")
    write_triples_jsonl(by_predicate, out / "triples.filtered.jsonl")
    counts = {
        "sentences": len(sentences),
        "parsed": len(parsed),
        "parse_failures": len(failures),
        "raw_groups": len(raw),
        "lexicon_filtered": len(by_lexicon),
        "predicate_filtered": len(by_predicate),
    }
    if failures:
        _dump(out / "parse_failures.json", failures)
    _dump(out / "extract_counts.json", counts)
    return counts


def _write_dataset(examples, fp_map, data_dir: Path, opts: DatasetOptions) -> dict:
    data_dir.mkdir(parents=True, exist_ok=True)
    train, valid = split_dataset(examples, opts.valid_fraction, opts.seed)
    write_examples_jsonl(train, data_dir / "train.jsonl")
    write_examples_jsonl(valid, data_dir / "valid.jsonl")
    fp_map.save(data_dir / "fp_labels.json")
    save_identifier_map(data_dir / "identifier_labels.json")
    return {"train": len(train), "valid": len(valid), "label_map_hash": fp_map.digest()}


def run_build_dataset(triples_path, out_dir, opts: DatasetOptions | None = None, fp_map_path=None) -> dict:
    out = Path(out_dir)
    opts = opts or DatasetOptions()
    triples = read_triples_jsonl(triples_path)
    if fp_map_path and Path(fp_map_path).exists():
        fp_map = FormalPropertyLabelMap.load(fp_map_path)
    else:
        fp_map = FormalPropertyLabelMap.from_corpus(t.lemma for t in triples)
    annotated, conflicts = annotate_all(triples, fp_map, opts.append_triple)
    kept = length_filter(annotated, opts.max_words)
    counts = {"annotated": len(annotated), "span_conflicts": conflicts, "length_filtered": len(kept)}
    if len(kept) >= 2:
        counts.update(_write_dataset(kept, fp_map, out / "dataset", opts))
    else:
        log.warning("only %d example(s) survive; no train/valid split written", len(kept))
        (out / "dataset").mkdir(parents=True, exist_ok=True)
        write_examples_jsonl(kept, out / "dataset" / "all.jsonl")
        fp_map.save(out / "dataset" / "fp_labels.json")
        counts["label_map_hash"] = fp_map.digest()
    _dump(out / "dataset_counts.json", counts)
    return counts


def run_synth(out_dir, cfg: SynthConfig | None = None, seed: int = 0, opts: DatasetOptions | None = None) -> dict:
    out = Path(out_dir)
    opts = opts or DatasetOptions(seed=seed)
    corpus = generate_synthetic_corpus(cfg, seed)
    fp_map = FormalPropertyLabelMap.from_corpus(ex.predicate for ex in corpus)
    kept = length_filter(corpus, opts.max_words)
    counts = {"generated": len(corpus), "length_filtered": len(kept)}
    counts.update(_write_dataset(kept, fp_map, out / "dataset", opts))
    _dump(out / "synth_counts.json", counts)
    return counts


def load_dataset_dir(data_dir):
    d = Path(data_dir)
    fp_map = FormalPropertyLabelMap.load(d / "fp_labels.json")
    train = read_examples_jsonl(d / "train.jsonl")
    valid = read_examples_jsonl(d / "valid.jsonl")
    return train, valid, fp_map


def funnel(out_dir) -> dict:
    """Stage counts gathered from whatever stages have run in ``out_dir``."""
    out = Path(out_dir)
    merged: dict = {}
    for name in ("ingest_counts.json", "extract_counts.json", "dataset_counts.json"):
        p = out / name
        if p.exists():
            merged.update(json.loads(p.read_text(encoding="utf-8")))
    return {stage: merged.get(stage) for stage in FUNNEL_STAGES}
