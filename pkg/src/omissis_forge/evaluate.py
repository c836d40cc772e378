"""Class weighting, reference weighted loss, and token-level metrics.

Weights follow the balanced heuristic w_i = (sum_j f_j) / (n * f_i): a class
twice as frequent gets half the weight, and sum_i f_i * w_i = sum_j f_j holds
exactly. The loss is the weight-normalized mean of per-position negative log
likelihood; positions labeled -100 never count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyEvaluation,
    LengthMismatch,
    ShapeMismatch,
    UnnormalizedDistribution,
    ZeroFrequency,
)

IGNORE_LABEL = -100
POSITIVE_CLASSES = (1, 2)


@dataclass(frozen=True)
class ClassWeights:
    frequencies: tuple[int, ...]
    weights: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.frequencies)

    def to_json(self) -> dict:
        return {"frequencies": list(self.frequencies), "weights": list(self.weights)}


def balanced_weights(frequencies: list[int]) -> ClassWeights:
    """w_i = total / (n * f_i); refuses zero frequencies outright."""
    freqs = tuple(int(f) for f in frequencies)
    for i, f in enumerate(freqs):
        if f <= 0:
            raise ZeroFrequency(
                f"class {i} has frequency {f}; smooth or drop the class before weighting"
            )
    total = sum(freqs)
    n = len(freqs)
    return ClassWeights(frequencies=freqs, weights=tuple(total / (n * f) for f in freqs))


def weighted_ce_loss(
    probabilities: np.ndarray, labels: list[int] | np.ndarray, weights: ClassWeights
) -> float:
    """Weighted mean of -log p at the gold class over the counted positions.

    The mean is weight-normalized (sum of w * nll over sum of w), so uniform
    predictions cost exactly log(n) regardless of the label mix.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    gold = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2:
        raise ShapeMismatch(f"probabilities must be 2-d, got shape {probs.shape}")
    if probs.shape[0] != gold.shape[0]:
        raise ShapeMismatch(f"{probs.shape[0]} rows vs {gold.shape[0]} labels")
    if probs.shape[1] != weights.n:
        raise ShapeMismatch(f"{probs.shape[1]} classes vs {weights.n} weights")
    row_sums = probs.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > 1e-6):
        worst = float(np.max(np.abs(row_sums - 1.0)))
        raise UnnormalizedDistribution(f"row sums deviate from 1 by up to {worst}")
    counted = gold != IGNORE_LABEL
    if not np.any(counted):
        raise EmptyEvaluation("every position is ignore-labeled")
    gold = gold[counted]
    if np.any((gold < 0) | (gold >= weights.n)):
        raise ShapeMismatch(f"labels outside {{-100}} U [0, {weights.n})")
    picked = probs[counted, gold]
    w = np.asarray(weights.weights, dtype=np.float64)[gold]
    nll = -np.log(picked)
    return float(np.sum(w * nll) / np.sum(w))


@dataclass(frozen=True)
class TokenMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    confusion: np.ndarray
    averaging: str = "micro-positive"

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_class_f1": list(self.per_class_f1),
        }


def _f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def token_metrics(
    pred: list[int] | np.ndarray,
    gold: list[int] | np.ndarray,
    n_classes: int = 3,
) -> TokenMetrics:
    """Accuracy plus micro P/R/F1 over the positive classes {1, 2}.

    Positions with gold -100 are excluded. The headline precision/recall
    pool begin and inside tags as the positive set in the micro sense:
    confusing one positive class for the other still counts as an error.
    Per-class values are reported alongside.
    """
    p = np.asarray(pred, dtype=np.int64)
    g = np.asarray(gold, dtype=np.int64)
    if p.shape != g.shape:
        raise LengthMismatch(f"{p.shape[0]} predictions vs {g.shape[0]} gold labels")
    counted = g != IGNORE_LABEL
    if not np.any(counted):
        raise EmptyEvaluation("every position is ignore-labeled")
    p = p[counted]
    g = g[counted]
    if np.any((g < 0) | (g >= n_classes)) or np.any((p < 0) | (p >= n_classes)):
        raise ShapeMismatch(f"class ids outside [0, {n_classes})")

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (g, p), 1)

    accuracy = float(np.trace(confusion) / confusion.sum())

    tp = confusion.diagonal()
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    per_precision = tuple(
        float(tp[c] / (tp[c] + fp[c])) if tp[c] + fp[c] > 0 else 0.0 for c in range(n_classes)
    )
    per_recall = tuple(
        float(tp[c] / (tp[c] + fn[c])) if tp[c] + fn[c] > 0 else 0.0 for c in range(n_classes)
    )
    per_f1 = tuple(_f1(pr, rc) for pr, rc in zip(per_precision, per_recall))

    pos = [c for c in POSITIVE_CLASSES if c < n_classes]
    pos_tp = int(tp[pos].sum())
    pos_fp = int(fp[pos].sum())
    pos_fn = int(fn[pos].sum())
    precision = pos_tp / (pos_tp + pos_fp) if pos_tp + pos_fp > 0 else 0.0
    recall = pos_tp / (pos_tp + pos_fn) if pos_tp + pos_fn > 0 else 0.0

    return TokenMetrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        per_class_precision=per_precision,
        per_class_recall=per_recall,
        per_class_f1=per_f1,
        confusion=confusion,
    )
