"""Word labels onto subword tokens and back.

The parse backend tokenizes words deterministically; the encoder's
WordPiece vocabulary then splits them further. The first subword of each
word carries the word's label, continuation subwords and special tokens get
``IGNORE``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from tokenizers import Tokenizer
from tokenizers.decoders import WordPiece as WordPieceDecoder
from tokenizers.models import WordPiece
from tokenizers.normalizers import BertNormalizer
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import TemplateProcessing

from ..errors import TooLong
from .examples import SEPARATOR, AnnotatedExample
from .labels import IGNORE

MAX_SEQ_LEN = 256
SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


@dataclass
class ModelReadyExample:
    input_ids: list[int]
    attention_mask: list[int]
    identifier_labels: list[int]
    fp_labels: list[int]
    word_index: list[int]  # word position of each subword, -1 for special tokens
    n_words: int
    sentence_id: str = ""
    relation_subword: int = -1

    def __len__(self) -> int:
        return len(self.input_ids)


def encode_words(tokenizer, words: list[str]) -> tuple[list[int], list[int | None]]:
    """Subword ids and word ids for pre-split words.

    Works with a ``tokenizers.Tokenizer`` and with a transformers fast tokenizer.
    """
    if isinstance(tokenizer, Tokenizer):
        enc = tokenizer.encode(words, is_pretokenized=True)
        return list(enc.ids), list(enc.word_ids)
    enc = tokenizer(words, is_split_into_words=True)
    return list(enc["input_ids"]), list(enc.word_ids())


def align_to_subwords(example: AnnotatedExample, tokenizer, max_len: int = MAX_SEQ_LEN) -> ModelReadyExample:
    ids, word_ids = encode_words(tokenizer, example.words)
    if len(ids) > max_len:
        raise TooLong(f"{example.sentence_id}: {len(ids)} subwords exceeds {max_len}")
    idf, fp, index = [], [], []
    seen = set()
    relation_subword = -1
    for pos, w in enumerate(word_ids):
        if w is None:
            idf.append(IGNORE)
            fp.append(IGNORE)
            index.append(-1)
            continue
        index.append(w)
        if w in seen:
            idf.append(IGNORE)
            fp.append(IGNORE)
        else:
            seen.add(w)
            idf.append(example.identifier_labels[w])
            fp.append(example.fp_labels[w])
            if w == example.relation_index:
                relation_subword = pos
    if len(seen) != len(example.words):
        missing = sorted(set(range(len(example.words))) - seen)
        raise ValueError(f"{example.sentence_id}: words {missing} produced no subwords")
    return ModelReadyExample(
        input_ids=ids,
        attention_mask=[1] * len(ids),
        identifier_labels=idf,
        fp_labels=fp,
        word_index=index,
        n_words=len(example.words),
        sentence_id=example.sentence_id,
        relation_subword=relation_subword,
    )


def first_subword_positions(mre: ModelReadyExample) -> list[int]:
    firsts, seen = [], set()
    for pos, w in enumerate(mre.word_index):
        if w >= 0 and w not in seen:
            seen.add(w)
            firsts.append(pos)
    return firsts


def collapse_to_words(mre: ModelReadyExample, subword_values=None) -> list:
    """Per-word values read off each word's first subword.

    With ``subword_values`` omitted this returns ``(identifier, fp)`` word
    labels, the inverse of ``align_to_subwords``.
    """
    firsts = first_subword_positions(mre)
    if subword_values is not None:
        return [subword_values[p] for p in firsts]
    return [mre.identifier_labels[p] for p in firsts], [mre.fp_labels[p] for p in firsts]


def align_all(examples: Iterable[AnnotatedExample], tokenizer, max_len: int = MAX_SEQ_LEN):
    """Align every example; over-long ones are dropped and counted."""
    out, dropped = [], 0
    for ex in examples:
        try:
            out.append(align_to_subwords(ex, tokenizer, max_len))
        except TooLong:
            dropped += 1
    return out, dropped


def build_wordpiece(texts: Iterable[str], vocab_size: int = 1000) -> Tokenizer:
    """Cased WordPiece tokenizer with a vocabulary counted from ``texts``.

    The vocabulary holds the special tokens, every character seen (as a word
    start and as a ``##`` continuation, so any word can be spelled), then the
    most frequent whole words, ties broken alphabetically, up to
    ``vocab_size``. The same texts always give the same token ids, which the
    trainer shipped with ``tokenizers`` does not guarantee.
    """
    tok = Tokenizer(WordPiece({t: i for i, t in enumerate(SPECIAL_TOKENS)}, unk_token="[UNK]"))
    tok.normalizer = BertNormalizer(clean_text=True, handle_chinese_chars=True, strip_accents=False, lowercase=False)
    tok.pre_tokenizer = BertPreTokenizer()
    counts: Counter = Counter()
    for text in texts:
        counts.update(w for w, _ in tok.pre_tokenizer.pre_tokenize_str(tok.normalizer.normalize_str(text)))
    chars = sorted({c for w in counts for c in w})
    vocab = list(SPECIAL_TOKENS) + chars + ["##" + c for c in chars]
    known = set(vocab)
    for word, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if len(vocab) >= vocab_size:
            break
        if word not in known:
            vocab.append(word)
            known.add(word)
    tok.model = WordPiece({t: i for i, t in enumerate(vocab)}, unk_token="[UNK]", max_input_chars_per_word=100)
    tok.decoder = WordPieceDecoder()
    tok.add_special_tokens(SPECIAL_TOKENS)
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        special_tokens=[("[CLS]", tok.token_to_id("[CLS]")), ("[SEP]", tok.token_to_id("[SEP]"))],
    )
    return tok


def load_tokenizer(name_or_path: str):
    """A ``tokenizer.json`` path or a hub checkpoint name (the latter downloads)."""
    p = Path(name_or_path)
    if p.is_dir():
        p = p / "tokenizer.json"
    if p.exists():
        return Tokenizer.from_file(str(p))
    return Tokenizer.from_pretrained(name_or_path)


def corpus_texts(examples: Iterable[AnnotatedExample]) -> list[str]:
    return [" ".join(w for w in ex.words if w != SEPARATOR) for ex in examples]
