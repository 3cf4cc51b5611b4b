"""Command-line entry point: one subcommand per pipeline stage.

    protoabstract [--config run.toml] [--out DIR] <command> [options]

Commands: ingest, extract, build-dataset, train, eval, export, report, synth.
Every command writes ``manifest.<command>.json`` next to its artifacts. On
failure the exit status is non-zero and a JSON error object goes to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, PipelineError

log = logging.getLogger("protoabstract")

VARIANTS = ("disjoint", "joint1", "joint2")


@dataclass
class PipelineConfig:
    """Everything a run needs; loaded from TOML, then overridden by flags.

    Sections: ``[paths]``, ``[filter]``, ``[backend]``, ``[dataset]``,
    ``[encoder]``, ``[train]``, ``[synth]``; ``variant`` sits at top level.
    """

    paths: dict = field(default_factory=lambda: {"output_dir": "run"})
    filter: dict = field(default_factory=dict)
    backend: dict = field(default_factory=lambda: {"kind": "corenlp"})
    dataset: dict = field(default_factory=dict)
    encoder: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    synth: dict = field(default_factory=dict)
    variant: str = "joint2"

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        cfg = cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, value in raw.items():
            if isinstance(getattr(cfg, key), dict):
                getattr(cfg, key).update(value)
            else:
                setattr(cfg, key, value)
        return cfg

    @property
    def out(self) -> Path:
        return Path(self.paths.get("output_dir", "run"))


def _require(path, what: str) -> Path:
    if path is None:
        raise ConfigError(f"missing path: {what}")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} not found: {p}")
    return p


def _read_wordlist(value) -> list[str]:
    """A list of words, or a path to a file with one word per line."""
    if value is None:
        return []
    if isinstance(value, str):
        return [w.strip() for w in _require(value, "word list").read_text(encoding="utf-8").splitlines() if w.strip()]
    return list(value)


def filter_config(section: dict):
    from .ingest import FilterConfig

    stop = set(FilterConfig().stop_list) if section.get("default_stopwords", True) else set()
    stop |= set(_read_wordlist(section.get("stop_list")))
    return FilterConfig(
        stop_list=frozenset(stop),
        domain_exclude_list=frozenset(_read_wordlist(section.get("domain_exclude_list"))),
        casefold=section.get("casefold", True),
        strip_punct=section.get("strip_punct", True),
        split_phrases=section.get("split_phrases", True),
    )


def make_backend(section: dict):
    from .srt.parsing import ENDPOINT_ENV, CoreNLPBackend, FixtureBackend

    kind = section.get("kind", "corenlp")
    if kind == "fixture":
        return FixtureBackend.from_jsonl(_require(section.get("parses"), "fixture parses"))
    if kind == "corenlp":
        url = os.environ.get(ENDPOINT_ENV) or section.get("url")
        return CoreNLPBackend(url=url, timeout=float(section.get("timeout", 30)))
    raise ConfigError(f"unknown backend kind {kind!r}")


def _dataset_opts(cfg: PipelineConfig):
    from .pipeline import DatasetOptions

    return DatasetOptions(**cfg.dataset)


def _train_config(cfg: PipelineConfig, tiny: bool):
    from .train import TrainConfig

    section = dict(cfg.train)
    return TrainConfig.tiny(**section) if tiny else TrainConfig(**section)


# -- commands ----------------------------------------------------------------


def cmd_ingest(cfg: PipelineConfig) -> dict:
    from .pipeline import run_ingest

    fcfg = filter_config(cfg.filter)
    counts = run_ingest(_require(cfg.paths.get("tables"), "tables"), cfg.out, fcfg)
    return {"counts": counts, "config": {"filter": cfg.filter, "paths": cfg.paths},
            "artifacts": ["lexicon.txt", "lexicon.provenance.json", "ingest_counts.json"]}


def cmd_extract(cfg: PipelineConfig) -> dict:
    from .pipeline import ExtractOptions, run_extract

    sentences = _require(cfg.paths.get("sentences"), "sentences")
    lexicon = _require(cfg.paths.get("lexicon", cfg.out / "lexicon.txt"), "lexicon")
    backend = make_backend(cfg.backend)
    opts = ExtractOptions(prepositional=cfg.backend.get("prepositional", False),
                          copula=cfg.backend.get("copula", False))
    counts = run_extract(sentences, lexicon, cfg.out, backend, opts)
    return {"counts": counts, "config": {"backend": cfg.backend, "paths": cfg.paths},
            "artifacts": ["parsed.jsonl", "triples.raw.jsonl", "triples.lexicon.jsonl",
                          "triples.filtered.jsonl", "extract_counts.json"]}


def cmd_build_dataset(cfg: PipelineConfig) -> dict:
    from .pipeline import run_build_dataset

    triples = _require(cfg.paths.get("triples", cfg.out / "triples.filtered.jsonl"), "filtered triples")
    opts = _dataset_opts(cfg)
    counts = run_build_dataset(triples, cfg.out, opts, cfg.paths.get("fp_labels"))
    return {"counts": counts, "config": {"dataset": dataclasses.asdict(opts)}, "seed": opts.seed,
            "label_map_hash": counts.get("label_map_hash"),
            "artifacts": ["dataset/train.jsonl", "dataset/valid.jsonl", "dataset/fp_labels.json"]}


def cmd_synth(cfg: PipelineConfig) -> dict:
    from .dataset.synth import SynthConfig
    from .pipeline import run_synth

    section = dict(cfg.synth)
    seed = int(section.pop("seed", cfg.dataset.get("seed", 0)))
    scfg = SynthConfig(**section)
    opts = _dataset_opts(cfg)
    counts = run_synth(cfg.out, scfg, seed, opts)
    return {"counts": counts, "config": {"synth": dataclasses.asdict(scfg), "dataset": dataclasses.asdict(opts)},
            "seed": seed, "label_map_hash": counts["label_map_hash"],
            "artifacts": ["dataset/train.jsonl", "dataset/valid.jsonl", "dataset/fp_labels.json"]}


def cmd_train(cfg: PipelineConfig, tiny: bool) -> dict:
    from .dataset.align import align_all, corpus_texts, load_tokenizer, build_wordpiece
    from .model import EncoderConfig, save_model
    from .pipeline import load_dataset_dir
    from .train import train, write_history_csv

    data_dir = _require(cfg.paths.get("dataset", cfg.out / "dataset"), "dataset directory")
    train_ex, valid_ex, fp_map = load_dataset_dir(data_dir)
    enc_section = dict(cfg.encoder)
    max_len = int(cfg.dataset.get("max_seq_len", enc_section.get("max_seq_len", 256)))
    if tiny:
        vocab = int(enc_section.pop("tokenizer_vocab_size", 1000))
        tokenizer = build_wordpiece(corpus_texts(train_ex), vocab_size=vocab)
        enc_cfg = EncoderConfig.tiny(tokenizer.get_vocab_size(), max_seq_len=max_len, **enc_section)
    else:
        enc_cfg = EncoderConfig(max_seq_len=max_len, **enc_section)
        tokenizer = load_tokenizer(cfg.paths.get("tokenizer", enc_cfg.pretrained_checkpoint_name))
    tcfg = _train_config(cfg, tiny)
    tr, dropped_tr = align_all(train_ex, tokenizer, max_len)
    va, dropped_va = align_all(valid_ex, tokenizer, max_len)
    log.info("aligned %d train / %d valid examples (%d too long)", len(tr), len(va), dropped_tr + dropped_va)

    def show(rec):
        print(f"epoch {rec.epoch:3d}  train idf {rec.train_idf:.4f} fprop {rec.train_fprop:.4f}  "
              f"valid idf {rec.valid_idf:.4f} fprop {rec.valid_fprop:.4f}", flush=True)

    model, history = train(cfg.variant, tr, va, tcfg, enc_cfg, progress=show)
    model_dir = save_model(model, cfg.out / "model", fp_map, tokenizer)
    write_history_csv(history, cfg.out / "metrics.csv")
    final = dataclasses.asdict(history[-1])
    (cfg.out / "train_summary.json").write_text(json.dumps(
        {"variant": cfg.variant, "final": final, "too_long_dropped": dropped_tr + dropped_va}, indent=1) + "\n")
    return {"counts": final, "seed": tcfg.seed, "label_map_hash": fp_map.digest(),
            "config": {"variant": cfg.variant, "train": dataclasses.asdict(tcfg),
                       "encoder": dataclasses.asdict(enc_cfg)},
            "artifacts": [str(model_dir.relative_to(cfg.out)), "metrics.csv", "train_summary.json"]}


def _load_model_dir(cfg: PipelineConfig):
    from .dataset.align import load_tokenizer
    from .dataset.labels import FormalPropertyLabelMap
    from .model import load_model

    model_dir = _require(cfg.paths.get("model", cfg.out / "model"), "model directory")
    return load_model(model_dir), load_tokenizer(str(model_dir)), FormalPropertyLabelMap.load(model_dir / "fp_labels.json")


def cmd_eval(cfg: PipelineConfig, split: str) -> dict:
    from .dataset.align import align_all
    from .dataset.examples import read_examples_jsonl
    from .train import TrainConfig, error_distribution, evaluate

    model, tokenizer, fp_map = _load_model_dir(cfg)
    data_dir = _require(cfg.paths.get("dataset", cfg.out / "dataset"), "dataset directory")
    examples = read_examples_jsonl(_require(Path(data_dir) / f"{split}.jsonl", f"{split} split"))
    aligned, dropped = align_all(examples, tokenizer, model.cfg.max_seq_len)
    tcfg = TrainConfig(**{k: v for k, v in cfg.train.items() if k in ("batch_size", "fp_weight", "any_position")})
    metrics = evaluate(model, aligned, tcfg)
    dist = error_distribution(model, aligned, tcfg)
    dist.save(cfg.out / f"error_distribution.{split}.json", fp_map)
    result = {"split": split, "examples": len(aligned), "too_long_dropped": dropped, **metrics}
    (cfg.out / f"eval.{split}.json").write_text(json.dumps(result, indent=1) + "\n")
    print(json.dumps(result))
    return {"counts": result, "label_map_hash": fp_map.digest(), "config": {"split": split},
            "artifacts": [f"eval.{split}.json", f"error_distribution.{split}.json"]}


def cmd_export(cfg: PipelineConfig, fmt: str, mode: str, split: str) -> dict:
    from .dataset.examples import read_examples_jsonl
    from .dataset.labels import FormalPropertyLabelMap
    from .export import export_dependency_table, gold_records, prediction_records, summarize_catalog

    data_dir = _require(cfg.paths.get("dataset", cfg.out / "dataset"), "dataset directory")
    splits = ("train", "valid") if split == "all" else (split,)
    examples = [ex for s in splits for ex in read_examples_jsonl(_require(Path(data_dir) / f"{s}.jsonl", f"{s} split"))]
    if mode == "gold":
        fp_map = FormalPropertyLabelMap.load(Path(data_dir) / "fp_labels.json")
        records = gold_records(examples, fp_map)
    else:
        model, tokenizer, fp_map = _load_model_dir(cfg)
        records = prediction_records(model, examples, tokenizer, fp_map)
    name = f"dependency_table.{fmt}"
    n = export_dependency_table(records, cfg.out / name, fmt)
    summary = summarize_catalog(examples, fp_map) if examples else []
    (cfg.out / "catalog_summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    return {"counts": {"records": n, "examples": len(examples)}, "label_map_hash": fp_map.digest(),
            "config": {"format": fmt, "mode": mode, "split": split},
            "artifacts": [name, "catalog_summary.json"]}


def cmd_report(cfg: PipelineConfig) -> dict:
    from .pipeline import FUNNEL_STAGES, funnel

    counts = funnel(cfg.out)
    width = max(len(s) for s in FUNNEL_STAGES)
    for stage in FUNNEL_STAGES:
        value = counts[stage]
        print(f"{stage:<{width}}  {'-' if value is None else value}")
    (cfg.out / "report.json").write_text(json.dumps(counts, indent=1) + "\n")
    return {"counts": counts, "config": {}, "artifacts": ["report.json"]}


# -- argument handling ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="protoabstract", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", help="output directory (paths.output_dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="mine a terminology lexicon from tables")
    s.add_argument("--tables", help="JSON Lines tables file")
    s.add_argument("--domain-exclude", help="file with one excluded domain term per line")
    s.add_argument("--stop-list", help="file with extra stopwords")
    s.add_argument("--keep-phrases", action="store_true", help="keep whole cells as single terms")

    s = sub.add_parser("extract", help="parse sentences and filter SRT triples")
    s.add_argument("--sentences", help="sentences (.txt one per line, or .jsonl with id/text)")
    s.add_argument("--lexicon", help="lexicon file (default OUT/lexicon.txt)")
    s.add_argument("--backend", choices=("corenlp", "fixture"))
    s.add_argument("--parses", help="pre-computed parses for the fixture backend")
    s.add_argument("--url", help="CoreNLP server URL (env PROTOABSTRACT_PARSER_URL wins)")
    s.add_argument("--prepositional", action="store_true", help="allow oblique objects")
    s.add_argument("--copula", action="store_true", help="extract copular triples")

    s = sub.add_parser("build-dataset", help="annotate, length-filter and split triples")
    s.add_argument("--triples", help="filtered triples (default OUT/triples.filtered.jsonl)")
    s.add_argument("--max-words", type=int)
    s.add_argument("--valid-fraction", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--fp-labels", help="reuse a persisted formal-property label map")

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)

    s = sub.add_parser("train", help="train one model variant")
    s.add_argument("--dataset", help="dataset directory (default OUT/dataset)")
    s.add_argument("--variant", choices=VARIANTS)
    s.add_argument("--tiny", action="store_true", help="tiny random encoder + corpus-trained WordPiece")
    s.add_argument("--epochs", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--batch-size", type=int)
    s.add_argument("--seed", type=int)

    s = sub.add_parser("eval", help="metrics and error distribution of a trained model")
    s.add_argument("--model")
    s.add_argument("--dataset")
    s.add_argument("--split", default="valid", choices=("train", "valid"))

    s = sub.add_parser("export", help="write the formal dependency table")
    s.add_argument("--dataset")
    s.add_argument("--model")
    s.add_argument("--format", default="csv", choices=("csv", "jsonl"))
    s.add_argument("--mode", default="gold", choices=("gold", "prediction"))
    s.add_argument("--split", default="all", choices=("train", "valid", "all"))

    sub.add_parser("report", help="print pipeline funnel counts")
    return p


def apply_flags(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    def put(section: dict, key: str, value):
        if value is not None and value is not False:
            section[key] = value

    if args.out:
        cfg.paths["output_dir"] = args.out
    g = vars(args)
    for flag, key in (("tables", "tables"), ("sentences", "sentences"), ("lexicon", "lexicon"),
                      ("triples", "triples"), ("dataset", "dataset"), ("model", "model"),
                      ("fp_labels", "fp_labels")):
        put(cfg.paths, key, g.get(flag))
    put(cfg.filter, "domain_exclude_list", g.get("domain_exclude"))
    put(cfg.filter, "stop_list", g.get("stop_list"))
    if g.get("keep_phrases"):
        cfg.filter["split_phrases"] = False
    put(cfg.backend, "kind", g.get("backend"))
    put(cfg.backend, "parses", g.get("parses"))
    put(cfg.backend, "url", g.get("url"))
    put(cfg.backend, "prepositional", g.get("prepositional"))
    put(cfg.backend, "copula", g.get("copula"))
    put(cfg.dataset, "max_words", g.get("max_words"))
    put(cfg.dataset, "valid_fraction", g.get("valid_fraction"))
    if args.command in ("build-dataset", "synth"):
        put(cfg.dataset, "seed", g.get("seed"))
    put(cfg.synth, "n", g.get("n"))
    if args.command == "synth":
        put(cfg.synth, "seed", g.get("seed"))
    if g.get("variant"):
        cfg.variant = g["variant"]
    put(cfg.train, "epochs", g.get("epochs"))
    put(cfg.train, "learning_rate", g.get("lr"))
    put(cfg.train, "batch_size", g.get("batch_size"))
    if args.command == "train":
        put(cfg.train, "seed", g.get("seed"))
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {cfg.variant!r}")
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
        cfg = apply_flags(cfg, args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        c = args.command
        if c == "ingest":
            result = cmd_ingest(cfg)
        elif c == "extract":
            result = cmd_extract(cfg)
        elif c == "build-dataset":
            result = cmd_build_dataset(cfg)
        elif c == "synth":
            result = cmd_synth(cfg)
        elif c == "train":
            result = cmd_train(cfg, args.tiny)
        elif c == "eval":
            result = cmd_eval(cfg, args.split)
        elif c == "export":
            result = cmd_export(cfg, args.format, args.mode, args.split)
        else:
            result = cmd_report(cfg)
        from .manifest import write_manifest

        write_manifest(cfg.out, c, result.get("config", {}), seed=result.get("seed"),
                       label_map_hash=result.get("label_map_hash"), artifacts=result.get("artifacts", ()),
                       extra={"counts": result.get("counts")})
        if c not in ("report", "eval", "train"):
            print(json.dumps(result.get("counts"), default=str))
        return 0
    except PipelineError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(json.dumps({"error": "invalid_input", "type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
