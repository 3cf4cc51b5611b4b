import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden_funnel() -> dict:
    return json.loads((FIXTURES / "funnel_golden.json").read_text())


@pytest.fixture(scope="session")
def synth_small():
    """60 synthetic examples, their label map and a WordPiece trained on them."""
    from protoabstract.dataset.align import corpus_texts, build_wordpiece
    from protoabstract.dataset.labels import FormalPropertyLabelMap
    from protoabstract.dataset.synth import SynthConfig, generate_synthetic_corpus

    corpus = generate_synthetic_corpus(SynthConfig(n=60), seed=3)
    fp_map = FormalPropertyLabelMap.from_corpus(ex.predicate for ex in corpus)
    tok = build_wordpiece(corpus_texts(corpus), vocab_size=120)
    return corpus, fp_map, tok
