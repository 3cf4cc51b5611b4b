"""Bidirectional encoder with an identifier head and a formal-property head.

Three wirings of the formal-property (FP) head:

* ``disjoint`` -- FP head reads the encoder states ``H``; the two heads only
  share the encoder.
* ``joint1``  -- FP head reads the identifier logits ``I'`` only.
* ``joint2``  -- FP head reads ``concat(H, I')``, width ``hidden + 3``.

The joint variants consume raw logits, not argmax labels, so the FP loss
back-propagates into the identifier head.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn
from transformers import BertConfig, BertModel

from .dataset.labels import IGNORE, NUM_FP_LABELS, NUM_IDENTIFIER_LABELS
from .errors import AllIgnored, SequenceTooLong, ShapeMismatch


class ModelVariant(str, Enum):
    DISJOINT = "disjoint"
    JOINT1 = "joint1"
    JOINT2 = "joint2"


@dataclass
class EncoderConfig:
    num_layers: int = 12
    hidden_dim: int = 768
    num_heads: int = 12
    intermediate_dim: int = 3072
    max_seq_len: int = 256
    pretrained_checkpoint_name: str = "bert-base-cased"
    # False builds a randomly initialised encoder of the given shape
    pretrained: bool = True
    freeze_encoder: bool = False
    vocab_size: int = 28996
    dropout: float = 0.1
    head_activation: str = "gelu"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hidden_dim <= 0 or self.num_layers <= 0:
            raise ValueError("hidden_dim and num_layers must be positive")
        if self.max_seq_len > 512:
            raise ValueError("max_seq_len cannot exceed the encoder's 512 positions")

    @classmethod
    def tiny(cls, vocab_size: int, **overrides) -> "EncoderConfig":
        """Two layers, 32 dims, random init: the test and desk-scale configuration."""
        base = dict(num_layers=2, hidden_dim=32, num_heads=2, intermediate_dim=64,
                    pretrained=False, vocab_size=vocab_size,
                    pretrained_checkpoint_name="tiny-random")
        base.update(overrides)
        return cls(**base)

    def bert_config(self) -> BertConfig:
        return BertConfig(
            vocab_size=self.vocab_size,
            hidden_size=self.hidden_dim,
            num_hidden_layers=self.num_layers,
            num_attention_heads=self.num_heads,
            intermediate_size=self.intermediate_dim,
            max_position_embeddings=max(self.max_seq_len, 512 if self.pretrained else self.max_seq_len),
            hidden_dropout_prob=self.dropout,
            attention_probs_dropout_prob=self.dropout,
        )


_ACTIVATIONS = {"gelu": nn.GELU, "relu": nn.ReLU, "tanh": nn.Tanh}


class MLPHead(nn.Module):
    """Position-wise two-layer perceptron."""

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int, activation: str = "gelu"):
        super().__init__()
        self.fc1 = nn.Linear(in_dim, hidden_dim)
        self.act = _ACTIVATIONS[activation]()
        self.fc2 = nn.Linear(hidden_dim, out_dim)

    @property
    def in_features(self) -> int:
        return self.fc1.in_features

    def forward(self, x):
        return self.fc2(self.act(self.fc1(x)))


def fp_input_width(variant: ModelVariant, hidden_dim: int) -> int:
    variant = ModelVariant(variant)
    if variant is ModelVariant.DISJOINT:
        return hidden_dim
    if variant is ModelVariant.JOINT1:
        return NUM_IDENTIFIER_LABELS
    return hidden_dim + NUM_IDENTIFIER_LABELS


class JointModel(nn.Module):
    def __init__(self, cfg: EncoderConfig, variant: ModelVariant | str = ModelVariant.JOINT2, encoder: BertModel | None = None):
        super().__init__()
        self.cfg = cfg
        self.variant = ModelVariant(variant)
        if encoder is None:
            if cfg.pretrained:
                encoder = BertModel.from_pretrained(cfg.pretrained_checkpoint_name, add_pooling_layer=False)
            else:
                encoder = BertModel(cfg.bert_config(), add_pooling_layer=False)
        self.encoder = encoder
        hidden = self.encoder.config.hidden_size
        if hidden != cfg.hidden_dim:
            raise ShapeMismatch(f"encoder hidden size {hidden} != configured {cfg.hidden_dim}")
        self.idf_head = MLPHead(hidden, hidden, NUM_IDENTIFIER_LABELS, cfg.head_activation)
        self.fp_head = MLPHead(fp_input_width(self.variant, hidden), hidden, NUM_FP_LABELS, cfg.head_activation)
        if cfg.freeze_encoder:
            for p in self.encoder.parameters():
                p.requires_grad_(False)

    def encode(self, input_ids, attention_mask=None):
        """Hidden states ``H`` of shape (batch, length, hidden)."""
        if input_ids.shape[-1] > self.cfg.max_seq_len:
            raise SequenceTooLong(f"{input_ids.shape[-1]} subwords > max_seq_len {self.cfg.max_seq_len}")
        if attention_mask is None:
            attention_mask = torch.ones_like(input_ids)
        return self.encoder(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state

    def heads(self, H, identifier_logits=None):
        """``(I', P')`` from hidden states.

        ``identifier_logits`` replaces the identifier head's output on the FP
        path (ablation hook); the returned ``I'`` is still the head's own.
        """
        idf_logits = self.idf_head(H)
        feed = idf_logits if identifier_logits is None else identifier_logits
        if self.variant is ModelVariant.DISJOINT:
            fp_in = H
        elif self.variant is ModelVariant.JOINT1:
            fp_in = feed
        else:
            fp_in = torch.cat([H, feed], dim=-1)
        if fp_in.shape[-1] != self.fp_head.in_features:
            raise ShapeMismatch(
                f"{self.variant.value}: FP head expects width {self.fp_head.in_features}, got {fp_in.shape[-1]}"
            )
        return idf_logits, self.fp_head(fp_in)

    def forward(self, input_ids, attention_mask=None):
        return self.heads(self.encode(input_ids, attention_mask))


def predict(idf_logits, fp_logits):
    """Per-position argmax of the softmax; ties go to the lowest label index."""
    idf = torch.argmax(torch.softmax(idf_logits, dim=-1), dim=-1)
    fp = torch.argmax(torch.softmax(fp_logits, dim=-1), dim=-1)
    return idf, fp


def token_cross_entropy(logits, labels):
    """Mean cross-entropy over positions whose label is not ``IGNORE``."""
    if not (labels != IGNORE).any():
        raise AllIgnored("no scorable positions in batch")
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), labels.reshape(-1), ignore_index=IGNORE)


def combined_loss(idf_logits, fp_logits, idf_labels, fp_labels, fp_weight: float = 1.0):
    """Identifier cross-entropy plus ``fp_weight`` times FP cross-entropy."""
    loss = token_cross_entropy(idf_logits, idf_labels)
    if fp_weight:
        loss = loss + fp_weight * token_cross_entropy(fp_logits, fp_labels)
    return loss


# -- persistence -------------------------------------------------------------


def save_model(model: JointModel, directory, fp_map=None, tokenizer=None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), d / "model.pt")
    meta = {
        "variant": model.variant.value,
        "encoder_config": asdict(model.cfg),
        "bert_config": model.encoder.config.to_dict(),
    }
    (d / "config.json").write_text(json.dumps(meta, indent=1, default=str), encoding="utf-8")
    if fp_map is not None:
        fp_map.save(d / "fp_labels.json")
    if tokenizer is not None and hasattr(tokenizer, "save"):
        tokenizer.save(str(d / "tokenizer.json"))
    return d


def load_model(directory) -> JointModel:
    d = Path(directory)
    meta = json.loads((d / "config.json").read_text(encoding="utf-8"))
    cfg = EncoderConfig(**meta["encoder_config"])
    bert_cfg = BertConfig(**{k: v for k, v in meta["bert_config"].items()
                             if k not in ("architectures", "transformers_version")})
    model = JointModel(cfg, meta["variant"], encoder=BertModel(bert_cfg, add_pooling_layer=False))
    model.load_state_dict(torch.load(d / "model.pt", map_location="cpu", weights_only=True))
    model.eval()
    return model
