from .align import (
    MAX_SEQ_LEN,
    ModelReadyExample,
    align_all,
    align_to_subwords,
    collapse_to_words,
    encode_words,
    load_tokenizer,
    build_wordpiece,
)
from .examples import (
    MAX_WORDS,
    SEPARATOR,
    AnnotatedExample,
    annotate,
    annotate_all,
    length_filter,
    read_examples_jsonl,
    split_dataset,
    write_examples_jsonl,
)
from .labels import (
    IDENTIFIER_LABELS,
    IGNORE,
    NUM_FP_LABELS,
    NUM_IDENTIFIER_LABELS,
    FormalPropertyLabelMap,
)
from .synth import SynthConfig, generate_synthetic_corpus
