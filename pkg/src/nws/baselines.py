"""Reference weighting schemes: uniform averaging and inverse sentence frequency.

Both produce drop-in alternatives to a learned salience table so the
evaluation code can treat every scheme the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus, Sentence, sentence_frequencies
from .embeddings import EmbeddingTable
from .errors import UnembeddableSentenceError

KINDS = ("NWS", "AVG", "ISF")


@dataclass
class WeightingScheme:
    """A per-word score array tagged with how it was produced.

    For AVG the scores are a uniform placeholder; the actual weight of each
    word in a sentence is 1 / (number of words in that sentence).
    """

    kind: str
    scores: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; expected one of {KINDS}")


def isf_scores(freqs: Mapping[int, int], total_sentences: int, vocab_size: int) -> np.ndarray:
    """ln(1 + total / contains(w)) for every word id.

    Words never observed in the corpus get ln(1 + total), the supremum over
    observed words, so unseen evaluation words count as maximally rare.
    """
    if total_sentences < 1:
        raise ValueError("total_sentences must be >= 1")
    out = np.full(vocab_size, math.log(1.0 + total_sentences))
    for wid, count in freqs.items():
        if count > 0:
            out[wid] = math.log(1.0 + total_sentences / count)
    return out


def isf_scheme(corpus: Corpus, vocab_size: int) -> WeightingScheme:
    freqs = sentence_frequencies(corpus)
    return WeightingScheme("ISF", isf_scores(freqs, corpus.sentence_count, vocab_size))


def avg_scheme(vocab_size: int) -> WeightingScheme:
    return WeightingScheme("AVG", np.ones(vocab_size))


def scheme_embed(
    token_ids: Sequence[int],
    scheme: WeightingScheme,
    table: EmbeddingTable,
    *,
    multiset: bool = False,
) -> np.ndarray:
    """Embed a tokenized sentence under the given scheme.

    NWS and ISF weight each word by its score; AVG takes the arithmetic
    mean. Set semantics by default, occurrence counts under multiset.
    """
    ids = list(token_ids) if multiset else sorted(set(token_ids))
    if not ids:
        raise UnembeddableSentenceError("sentence has no in-vocabulary words")
    if scheme.kind == "AVG":
        weights = np.full(len(ids), 1.0 / len(ids))
    else:
        weights = scheme.scores[ids]
    return weights @ table.vectors[ids]


def avg_embed(sentence: Sentence, table: EmbeddingTable, *, multiset: bool = False) -> np.ndarray:
    """Arithmetic mean of the sentence's word vectors."""
    return scheme_embed(sentence.token_ids, avg_scheme(len(table)), table, multiset=multiset)
