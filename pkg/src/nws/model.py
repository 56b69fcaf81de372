"""The salience learner.

A sentence is embedded as the salience-weighted sum of its word vectors.
Adjacent sentence pairs are positives, random non-adjacent pairs negatives,
and each pair is scored with a softmax over inner products whose
normalization is approximated by a small sampled noise set. Cross-entropy
error is backpropagated only into the per-word salience scalars; the word
vectors stay fixed. Updates are plain stochastic steps scheduled by AdaGrad.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .corpus import Corpus, Sentence, TrainingInstance, sample_training_instances
from .embeddings import EmbeddingTable
from .errors import TrainingDivergedError, UnembeddableSentenceError


@dataclass
class TrainConfig:
    """Hyperparameters for a training run.

    k is the noise-set size used to approximate the softmax normalization;
    negatives_per_anchor controls how many label-0 pairs each anchor
    contributes (0 disables the negative path entirely). With multiset=False
    a sentence is treated as the set of its distinct words; multiset=True
    counts repeated occurrences instead.
    """

    k: int = 5
    negatives_per_anchor: int = 1
    epochs: int = 5
    learning_rate: float = 0.01
    seed: int = 0
    adagrad_epsilon: float = 1e-8
    multiset: bool = False
    gradient_clip: float | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.k <= 10:
            raise ValueError(f"k must be in [1, 10], got {self.k}")
        if self.negatives_per_anchor < 0:
            raise ValueError("negatives_per_anchor must be >= 0")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not self.adagrad_epsilon > 0:
            raise ValueError("adagrad_epsilon must be > 0")
        if self.gradient_clip is not None and not self.gradient_clip > 0:
            raise ValueError("gradient_clip must be > 0 when set")


@dataclass
class SalienceTable:
    """Learnable per-word scalars plus their AdaGrad accumulators."""

    q: np.ndarray
    adagrad_acc: np.ndarray
    epoch_count: int = 0
    epoch_losses: list[float] = field(default_factory=list)

    def copy(self) -> "SalienceTable":
        return SalienceTable(
            self.q.copy(), self.adagrad_acc.copy(), self.epoch_count, list(self.epoch_losses)
        )

    def __len__(self) -> int:
        return int(self.q.shape[0])


def init_salience(vocab_size: int, seed: int) -> SalienceTable:
    """Fresh table: scores drawn uniformly on [0, 1), accumulators at zero."""
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    rng = np.random.default_rng(seed)
    return SalienceTable(q=rng.random(vocab_size), adagrad_acc=np.zeros(vocab_size))


def _sentence_ids(sentence: Sentence, multiset: bool) -> list[int]:
    # Sorted distinct ids keep the float accumulation order reproducible.
    return list(sentence.token_ids) if multiset else sorted(sentence.word_set)


def embed_sentence(
    sentence: Sentence,
    salience: SalienceTable,
    table: EmbeddingTable,
    *,
    multiset: bool = False,
) -> np.ndarray:
    """Weighted sum of the sentence's word vectors, weighted by salience.

    Set semantics by default: each distinct word contributes once regardless
    of how often it occurs.
    """
    ids = _sentence_ids(sentence, multiset)
    if not ids:
        raise UnembeddableSentenceError("sentence has no in-vocabulary words")
    return salience.q[ids] @ table.vectors[ids]


def softmax_similarity(
    anchor_vec: np.ndarray,
    candidate_vec: np.ndarray,
    noise_vecs: list[np.ndarray] | np.ndarray,
) -> tuple[float, np.ndarray]:
    """Softmax of inner products of the anchor against candidate and noise.

    Returns (h, weights): h is the candidate's share of the softmax mass and
    weights are all K+1 shares (candidate first), summing to 1. The maximum
    logit is subtracted before exponentiation, which leaves the value
    unchanged but cannot overflow.
    """
    others = np.vstack([candidate_vec, *noise_vecs])
    logits = others @ anchor_vec
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    weights = exp / exp.sum()
    return float(weights[0]), weights


class _Forward:
    """Shared per-instance computation used by both loss and gradient."""

    __slots__ = (
        "anchor",
        "others",
        "multiset",
        "s_anchor",
        "s_others",
        "weights",
        "h",
        "log_h",
        "log_1mh",
    )

    def __init__(
        self,
        instance: TrainingInstance,
        corpus: Corpus,
        salience: SalienceTable,
        table: EmbeddingTable,
        multiset: bool,
    ):
        self.multiset = multiset
        self.anchor = corpus.sentence(instance.anchor_id)
        self.others = [
            corpus.sentence(gid) for gid in (instance.candidate_id, *instance.noise_ids)
        ]
        self.s_anchor = embed_sentence(self.anchor, salience, table, multiset=multiset)
        self.s_others = np.vstack(
            [embed_sentence(s, salience, table, multiset=multiset) for s in self.others]
        )
        logits = self.s_others @ self.s_anchor
        shifted = logits - logits.max()
        exp = np.exp(shifted)
        total = exp.sum()
        self.weights = exp / total
        self.h = float(self.weights[0])
        log_total = math.log(total)
        self.log_h = float(shifted[0]) - log_total
        noise_mass = float(exp[1:].sum())
        self.log_1mh = (math.log(noise_mass) - log_total) if noise_mass > 0.0 else -math.inf

    def loss(self, label: int) -> float:
        return -self.log_h if label == 1 else -self.log_1mh


def instance_loss(
    instance: TrainingInstance,
    corpus: Corpus,
    salience: SalienceTable,
    table: EmbeddingTable,
    *,
    multiset: bool = False,
) -> float:
    """Cross-entropy error of one instance (negated log-likelihood, >= 0)."""
    fwd = _Forward(instance, corpus, salience, table, multiset)
    return fwd.loss(instance.label)


def _word_counts(sentence: Sentence, multiset: bool) -> list[tuple[int, float]]:
    if multiset:
        return [(wid, float(c)) for wid, c in sorted(Counter(sentence.token_ids).items())]
    return [(wid, 1.0) for wid in sorted(sentence.word_set)]


def instance_gradient(
    instance: TrainingInstance,
    corpus: Corpus,
    salience: SalienceTable,
    table: EmbeddingTable,
    *,
    multiset: bool = False,
) -> dict[int, float]:
    """Exact sparse gradient of the instance loss with respect to salience.

    Only words occurring in the anchor, the candidate, or a noise sentence
    get an entry. Writing g for the log of the softmax share h and p_k for
    the softmax weights, the chain rule gives

        dg/dq(w) = c_a(w) w.(s_cand - sum_k p_k s_k)
                   + sum_k (delta_cand(k) - p_k) c_k(w) w.s_anchor
        dL/dq(w) = (h - label) / (1 - h) * dg/dq(w)

    where c_x(w) is 1 for membership under set semantics or the occurrence
    count under multiset semantics. For label 1 the prefactor is exactly -1.
    """
    fwd = _Forward(instance, corpus, salience, table, multiset)
    loss, grad = _loss_and_gradient(fwd, instance.label, table)
    return grad


def _loss_and_gradient(
    fwd: _Forward, label: int, table: EmbeddingTable
) -> tuple[float, dict[int, float]]:
    weights = fwd.weights
    if label == 1:
        # (h - 1) / (1 - h) is exactly -1; take the exact branch.
        coef = -1.0
    else:
        noise_mass = float(weights[1:].sum())  # equals 1 - h, summed directly
        coef = fwd.h / noise_mass

    grad: dict[int, float] = {}
    # Anchor words: w . (s_candidate - weighted mean of the compared sentences).
    s_bar = weights @ fwd.s_others
    direction = fwd.s_others[0] - s_bar
    for wid, count in _word_counts(fwd.anchor, fwd.multiset):
        grad[wid] = count * float(table.vectors[wid] @ direction)
    # Candidate and noise words: (1 or 0 minus softmax weight) * w . s_anchor.
    for k, sent in enumerate(fwd.others):
        factor = (1.0 if k == 0 else 0.0) - float(weights[k])
        for wid, count in _word_counts(sent, fwd.multiset):
            value = count * factor * float(table.vectors[wid] @ fwd.s_anchor)
            grad[wid] = grad.get(wid, 0.0) + value

    for wid in grad:
        grad[wid] *= coef
    return fwd.loss(label), grad


def apply_adagrad(
    salience: SalienceTable, sparse_grad: Mapping[int, float], config: TrainConfig
) -> SalienceTable:
    """One AdaGrad step over the gradient's support; other words untouched.

    For each entry g at word w: acc[w] += g*g and
    q[w] -= learning_rate * g / (sqrt(acc[w]) + epsilon).
    """
    lr = config.learning_rate
    eps = config.adagrad_epsilon
    clip = config.gradient_clip
    for wid, g in sparse_grad.items():
        if clip is not None:
            g = max(-clip, min(clip, g))
        salience.adagrad_acc[wid] += g * g
        salience.q[wid] -= lr * g / (math.sqrt(salience.adagrad_acc[wid]) + eps)
    return salience


def train(
    corpus: Corpus,
    table: EmbeddingTable,
    config: TrainConfig,
    *,
    initial: SalienceTable | None = None,
    on_epoch: Callable[[int, float, SalienceTable], None] | None = None,
) -> SalienceTable:
    """Run the full training loop and return the learned table.

    Each epoch consumes a freshly seeded instance stream (seed + epoch
    index) and applies one AdaGrad step per instance, batch size 1. Passing
    `initial` (for example a loaded checkpoint) resumes from its epoch
    count. `on_epoch` is called after every epoch with (epoch index, mean
    loss, table). Identical inputs produce a bit-identical result.
    """
    if initial is not None:
        salience = initial.copy()
    else:
        salience = init_salience(len(table), config.seed)

    multiset = config.multiset
    start = salience.epoch_count
    for epoch in range(start, start + config.epochs):
        total = 0.0
        count = 0
        stream = sample_training_instances(
            corpus, config.k, config.negatives_per_anchor, config.seed + epoch
        )
        for instance in stream:
            fwd = _Forward(instance, corpus, salience, table, multiset)
            loss = fwd.loss(instance.label)
            _, grad = _loss_and_gradient(fwd, instance.label, table)
            apply_adagrad(salience, grad, config)
            total += loss
            count += 1
        mean_loss = total / count
        if not math.isfinite(mean_loss):
            raise TrainingDivergedError(
                f"mean loss {mean_loss} at epoch {epoch + 1}; aborting"
            )
        salience.epoch_count = epoch + 1
        salience.epoch_losses.append(mean_loss)
        if on_epoch is not None:
            on_epoch(epoch, mean_loss, salience)
    return salience
