"""Identifier token accuracy, formal-property example accuracy, confusion counts.

All functions take padded integer arrays of shape (batch, length) where
``IGNORE`` marks positions that are not scored (padding, special tokens,
continuation subwords). Ragged lists of sequences are padded on the way in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset.labels import IGNORE, NUM_FP_LABELS, NUM_IDENTIFIER_LABELS
from .errors import EmptyBatch


def as_padded(seqs, fill: int = IGNORE) -> np.ndarray:
    if isinstance(seqs, np.ndarray):
        return seqs if seqs.ndim == 2 else seqs.reshape(1, -1)
    if hasattr(seqs, "detach"):
        return seqs.detach().cpu().numpy()
    seqs = [list(s) for s in seqs]
    width = max((len(s) for s in seqs), default=0)
    out = np.full((len(seqs), width), fill, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = s
    return out


def idf_counts(pred, gold) -> tuple[int, int]:
    """``(correct, scorable)`` token counts."""
    pred, gold = as_padded(pred), as_padded(gold)
    mask = gold != IGNORE
    return int(((pred == gold) & mask).sum()), int(mask.sum())


def acc_idf(pred, gold) -> float:
    """Correct identifier plus correct non-identifier tokens over scorable tokens.

    This is plain token accuracy: a correctly predicted ``O`` counts the same
    as a correctly predicted identifier.
    """
    correct, total = idf_counts(pred, gold)
    if total == 0:
        raise EmptyBatch("no scorable identifier positions")
    return correct / total


def gold_relation_positions(gold) -> np.ndarray:
    gold = as_padded(gold)
    hits = (gold != IGNORE) & (gold != 0)
    per_row = hits.sum(axis=1)
    if (per_row != 1).any():
        bad = np.flatnonzero(per_row != 1).tolist()
        raise ValueError(f"examples {bad} do not have exactly one gold formal-property position")
    return hits.argmax(axis=1)


def fprop_counts(pred, gold, any_position: bool = False) -> tuple[int, int]:
    """``(correct examples, batch size)``."""
    pred, gold = as_padded(pred), as_padded(gold)
    if gold.shape[0] == 0:
        return 0, 0
    pos = gold_relation_positions(gold)
    rows = np.arange(gold.shape[0])
    target = gold[rows, pos]
    if any_position:
        correct = ((pred == target[:, None]) & (gold != IGNORE)).any(axis=1)
    else:
        correct = pred[rows, pos] == target
    return int(correct.sum()), int(gold.shape[0])


def acc_fprop(pred, gold, any_position: bool = False) -> float:
    """Fraction of examples whose prediction at the gold relation position is the gold predicate.

    With ``any_position`` an example also counts when the gold predicate is
    predicted anywhere in its scorable positions.
    """
    correct, batch = fprop_counts(pred, gold, any_position)
    if batch == 0:
        raise EmptyBatch("empty batch")
    return correct / batch


def confusion(pred, gold, n_labels: int) -> np.ndarray:
    """Counts indexed ``[gold, predicted]`` over scorable positions."""
    pred, gold = as_padded(pred), as_padded(gold)
    mask = gold != IGNORE
    flat = gold[mask] * n_labels + pred[mask]
    return np.bincount(flat, minlength=n_labels * n_labels).reshape(n_labels, n_labels)


@dataclass
class ErrorDistribution:
    identifier: np.ndarray  # (3, 3), rows gold, columns predicted
    fp: np.ndarray  # (24, 24)

    @classmethod
    def empty(cls) -> "ErrorDistribution":
        return cls(np.zeros((NUM_IDENTIFIER_LABELS,) * 2, dtype=np.int64),
                   np.zeros((NUM_FP_LABELS,) * 2, dtype=np.int64))

    def add(self, idf_pred, idf_gold, fp_pred, fp_gold) -> None:
        self.identifier += confusion(idf_pred, idf_gold, NUM_IDENTIFIER_LABELS)
        self.fp += confusion(fp_pred, fp_gold, NUM_FP_LABELS)

    def errors(self, which: str = "identifier") -> dict[tuple[int, int], int]:
        """Off-diagonal cells with non-zero counts."""
        m = getattr(self, which)
        return {(int(g), int(p)): int(m[g, p]) for g, p in zip(*np.nonzero(m)) if g != p}

    def to_dict(self, fp_map=None) -> dict:
        out = {
            "identifier": {"rows": "gold", "cols": "predicted", "counts": self.identifier.tolist()},
            "fp": {"rows": "gold", "cols": "predicted", "counts": self.fp.tolist()},
        }
        if fp_map is not None:
            out["fp"]["labels"] = [fp_map.word(i) for i in range(len(fp_map))]
        return out

    def save(self, path, fp_map=None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(fp_map), fh, indent=1)
