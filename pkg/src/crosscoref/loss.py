"""Numeric kernel for the noise-tolerant mention loss and the marginal
antecedent (cluster) loss, with analytic gradients.

Sign convention: both losses are negative log-likelihoods to *minimize*.
The mention loss downweights negative candidate spans by a factor
tau in [0,1]; tau=1 recovers plain binary cross-entropy, tau=0 ignores
negatives entirely. The total objective adds the mention loss to the
cluster loss with weight alpha_m.

This module is a verification kernel: no encoders, no training loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CorefError

PROB_EPS = 1e-7


class LossError(CorefError):
    pass


@dataclass(frozen=True)
class MentionBatch:
    """Mention-detector probabilities for the gold candidate spans
    (positives) and the remaining candidate spans (negatives), clamped
    to [eps, 1-eps] so the logs stay finite."""

    pos_probs: np.ndarray
    neg_probs: np.ndarray

    def __post_init__(self):
        for name in ("pos_probs", "neg_probs"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name,
                               np.clip(arr, PROB_EPS, 1.0 - PROB_EPS))


@dataclass(frozen=True)
class AntecedentBatch:
    """Per query mention: a score vector over candidate antecedents plus
    the dummy (no-antecedent) entry, and the gold index set into it."""

    scores: tuple[np.ndarray, ...]
    gold: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        scores = tuple(np.asarray(s, dtype=float) for s in self.scores)
        gold = tuple(tuple(int(i) for i in g) for g in self.gold)
        if len(scores) != len(gold):
            raise LossError("one gold index set per score vector required")
        for vector, indices in zip(scores, gold):
            if not indices:
                raise LossError("empty gold antecedent set")
            if not np.all(np.isfinite(vector)):
                raise LossError("scores must be finite")
            if any(i < 0 or i >= len(vector) for i in indices):
                raise LossError("gold index out of range")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "gold", gold)


@dataclass(frozen=True)
class LossConfig:
    tau: float
    alpha_m: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise LossError(f"tau must lie in [0,1], got {self.tau}")
        if self.alpha_m < 0:
            raise LossError(f"alpha_m must be non-negative, got {self.alpha_m}")


# Grid-searched defaults per training profile.
DEFAULT_LOSS_CONFIGS = {
    "en": LossConfig(tau=0.7, alpha_m=5.0),
    "zh": LossConfig(tau=0.7, alpha_m=5.0),
    "fa": LossConfig(tau=0.55, alpha_m=6.5),
    "ontonotes": LossConfig(tau=1.0, alpha_m=0.0),
}


def mention_loss(batch: MentionBatch, tau: float,
                 ) -> tuple[float, np.ndarray, np.ndarray]:
    """Noise-tolerant mention NLL and its gradient.

    value = -[sum log p  +  tau * sum log(1-q)] over positives p and
    negatives q; gradients are -1/p and tau/(1-q).
    """
    if not 0.0 <= tau <= 1.0:
        raise LossError(f"tau must lie in [0,1], got {tau}")
    pos, neg = batch.pos_probs, batch.neg_probs
    value = -(np.log(pos).sum() + tau * np.log1p(-neg).sum())
    grad_pos = -1.0 / pos
    grad_neg = tau / (1.0 - neg)
    return float(value), grad_pos, grad_neg


def cluster_loss(batch: AntecedentBatch) -> tuple[float, list[np.ndarray]]:
    """Marginal antecedent NLL and its gradient.

    Per query: -log sum_{j in gold} softmax_j(scores), stabilized by
    max subtraction. The gradient is softmax(scores) minus the
    gold-restricted softmax on the gold entries.
    """
    total = 0.0
    grads = []
    for vector, indices in zip(batch.scores, batch.gold):
        shifted = vector - vector.max()
        exp = np.exp(shifted)
        denom = exp.sum()
        gold_mask = np.zeros(len(vector), dtype=bool)
        gold_mask[list(indices)] = True
        gold_sum = exp[gold_mask].sum()
        total += float(np.log(denom) - np.log(gold_sum))
        grad = exp / denom
        grad[gold_mask] -= exp[gold_mask] / gold_sum
        grads.append(grad)
    return total, grads


def total_loss(mention: MentionBatch, antecedent: AntecedentBatch,
               cfg: LossConfig) -> float:
    """Combined objective: cluster loss plus alpha_m times mention loss."""
    mention_value, _, _ = mention_loss(mention, cfg.tau)
    cluster_value, _ = cluster_loss(antecedent)
    return cluster_value + cfg.alpha_m * mention_value


def binary_cross_entropy(batch: MentionBatch) -> float:
    """Plain BCE NLL over the same batch (the tau=1 special case)."""
    pos, neg = batch.pos_probs, batch.neg_probs
    return float(-(np.log(pos).sum() + np.log1p(-neg).sum()))
