"""Sentence-ordered corpus ingestion and training-instance sampling.

The corpus file format is one sentence per line, with a blank line closing
the current document. Sentence order inside a document is preserved exactly,
because adjacency between sentences is the training signal downstream.
"""

from __future__ import annotations

import bisect
import random
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .embeddings import Vocabulary
from .errors import CorpusIOError, CorpusTooSmallError, EmptyCorpusError

# Word-character runs stay whole; every punctuation mark is its own token.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize_sentence(text: str) -> list[str]:
    """Lowercase `text` and split it into word runs and single punctuation marks.

    Whitespace never appears inside a token; empty input yields an empty
    list. No stemming, stop-word removal, or other normalization.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Sentence:
    """One sentence as token ids plus the deduplicated set of those ids."""

    token_ids: tuple[int, ...]
    word_set: frozenset[int]

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "Sentence":
        ids = tuple(ids)
        return cls(ids, frozenset(ids))

    @property
    def trainable(self) -> bool:
        """False when every token was out of vocabulary (nothing to embed)."""
        return bool(self.token_ids)


@dataclass
class Document:
    sentences: list[Sentence]

    def __len__(self) -> int:
        return len(self.sentences)


class Corpus:
    """Ordered documents of ordered sentences over a shared vocabulary.

    Sentences are addressed by a global index that runs through the
    documents in order; adjacency is only ever defined inside one document.
    """

    def __init__(self, documents: list[Document], vocabulary: Vocabulary):
        self.documents = documents
        self.vocabulary = vocabulary
        self._starts: list[int] = []
        total = 0
        for doc in documents:
            self._starts.append(total)
            total += len(doc)
        self._count = total

    @property
    def sentence_count(self) -> int:
        return self._count

    def locate(self, gid: int) -> tuple[int, int]:
        """Map a global sentence index to (document index, local index)."""
        if not 0 <= gid < self._count:
            raise IndexError(f"sentence index {gid} out of range")
        doc_idx = bisect.bisect_right(self._starts, gid) - 1
        return doc_idx, gid - self._starts[doc_idx]

    def global_id(self, doc_idx: int, local_idx: int) -> int:
        return self._starts[doc_idx] + local_idx

    def sentence(self, gid: int) -> Sentence:
        doc_idx, local = self.locate(gid)
        return self.documents[doc_idx].sentences[local]

    def iter_sentences(self) -> Iterator[Sentence]:
        for doc in self.documents:
            yield from doc.sentences

    def neighbor_ids(self, gid: int) -> tuple[int, ...]:
        """Global ids of the in-document neighbors of `gid` (one or two)."""
        doc_idx, local = self.locate(gid)
        doc = self.documents[doc_idx]
        out = []
        if local > 0:
            out.append(gid - 1)
        if local + 1 < len(doc):
            out.append(gid + 1)
        return tuple(out)

    def trainable_ids(self) -> list[int]:
        return [gid for gid, sent in enumerate(self.iter_sentences()) if sent.trainable]


@dataclass
class IngestReport:
    lines: int = 0
    blank_lines: int = 0
    documents: int = 0
    sentences: int = 0
    empty_sentences: int = 0
    tokens_kept: int = 0
    tokens_dropped_oov: int = 0

    def as_text(self) -> str:
        return "\n".join(
            [
                f"lines: {self.lines}",
                f"blank_lines: {self.blank_lines}",
                f"documents: {self.documents}",
                f"sentences: {self.sentences}",
                f"empty_sentences: {self.empty_sentences}",
                f"tokens_kept: {self.tokens_kept}",
                f"tokens_dropped_oov: {self.tokens_dropped_oov}",
            ]
        )


def ingest_corpus(lines: Iterable[str], vocab: Vocabulary) -> tuple[Corpus, IngestReport]:
    """Build a Corpus from an iterable of sentence lines.

    Out-of-vocabulary tokens are dropped (counted in the report). Sentences
    that end up with no tokens are kept so positional adjacency is unchanged,
    but they are flagged non-trainable and never sampled. Consecutive blank
    lines do not create empty documents.
    """
    report = IngestReport()
    documents: list[Document] = []
    current: list[Sentence] = []

    def flush() -> None:
        if current:
            documents.append(Document(list(current)))
            current.clear()

    for line in lines:
        report.lines += 1
        if not line.strip():
            report.blank_lines += 1
            flush()
            continue
        ids = []
        for token in tokenize_sentence(line):
            wid = vocab.id_of(token)
            if wid is None:
                report.tokens_dropped_oov += 1
            else:
                ids.append(wid)
                report.tokens_kept += 1
        sentence = Sentence.from_ids(ids)
        if not sentence.trainable:
            report.empty_sentences += 1
        current.append(sentence)
        report.sentences += 1
    flush()

    report.documents = len(documents)
    corpus = Corpus(documents, vocab)
    if not any(sent.trainable for sent in corpus.iter_sentences()):
        raise EmptyCorpusError("empty corpus: no sentence has an in-vocabulary token")
    return corpus, report


def load_corpus_file(path: str | Path, vocab: Vocabulary) -> tuple[Corpus, IngestReport]:
    """Ingest a UTF-8 corpus file, reporting the byte offset on read failures."""
    return ingest_corpus(_decoded_lines(Path(path)), vocab)


def _decoded_lines(path: Path) -> Iterator[str]:
    offset = 0
    try:
        with open(path, "rb") as handle:
            for raw in handle:
                try:
                    yield raw.decode("utf-8")
                except UnicodeDecodeError as exc:
                    raise CorpusIOError(
                        f"undecodable byte in {path}", byte_offset=offset + exc.start
                    ) from exc
                offset += len(raw)
    except OSError as exc:
        raise CorpusIOError(f"cannot read {path}: {exc}", byte_offset=offset) from exc


def corpus_lines(corpus: Corpus) -> Iterator[str]:
    """Serialize back to the line format (token text joined by spaces).

    Sentences with no tokens cannot be represented in this format; for
    corpora without them, re-ingesting the output reproduces the token ids
    exactly.
    """
    words = corpus.vocabulary.id_to_word
    for doc_idx, doc in enumerate(corpus.documents):
        if doc_idx:
            yield "\n"
        for sent in doc.sentences:
            yield " ".join(words[wid] for wid in sent.token_ids) + "\n"


def sentence_frequencies(corpus: Corpus) -> Counter:
    """Number of sentences containing each word id (repeats inside one
    sentence count once). Missing ids index to 0."""
    freqs: Counter = Counter()
    for sent in corpus.iter_sentences():
        for wid in sent.word_set:
            freqs[wid] += 1
    return freqs


@dataclass(frozen=True)
class TrainingInstance:
    """An (anchor, candidate) sentence pair with its sampled noise set.

    label is 1 when the candidate is an in-document neighbor of the anchor,
    0 when it was drawn uniformly from the non-adjacent sentences.
    """

    anchor_id: int
    candidate_id: int
    label: int
    noise_ids: tuple[int, ...]


def sample_training_instances(
    corpus: Corpus,
    k: int,
    negatives_per_anchor: int,
    seed: int,
) -> Iterator[TrainingInstance]:
    """Yield a seeded, shuffled stream of training instances.

    Every trainable anchor emits one positive instance per trainable
    in-document neighbor, plus `negatives_per_anchor` negatives whose
    candidates are drawn uniformly from all trainable sentences that are
    neither the anchor nor one of its in-document neighbors. Each instance
    gets its own noise set of `k` distinct sentences, excluding the anchor
    and the candidate. The same seed reproduces the stream bit for bit.
    """
    if not 1 <= k <= 10:
        raise ValueError(f"noise-set size k must be in [1, 10], got {k}")
    if negatives_per_anchor < 0:
        raise ValueError("negatives_per_anchor must be >= 0")

    trainable = corpus.trainable_ids()
    if len(trainable) < k + 3:
        raise CorpusTooSmallError(
            f"corpus too small: {len(trainable)} trainable sentences, "
            f"need at least {k + 3} for k={k}"
        )

    rng = random.Random(seed)

    def draw_noise(anchor: int, candidate: int) -> tuple[int, ...]:
        chosen: set[int] = set()
        noise: list[int] = []
        while len(noise) < k:
            gid = trainable[rng.randrange(len(trainable))]
            if gid == anchor or gid == candidate or gid in chosen:
                continue
            chosen.add(gid)
            noise.append(gid)
        return tuple(noise)

    def draw_negative(anchor: int, excluded: frozenset[int]) -> int:
        while True:
            gid = trainable[rng.randrange(len(trainable))]
            if gid not in excluded:
                return gid

    instances: list[TrainingInstance] = []
    for anchor in trainable:
        neighbors = corpus.neighbor_ids(anchor)
        for neighbor in neighbors:
            if corpus.sentence(neighbor).trainable:
                instances.append(
                    TrainingInstance(anchor, neighbor, 1, draw_noise(anchor, neighbor))
                )
        excluded = frozenset((anchor, *neighbors))
        for _ in range(negatives_per_anchor):
            candidate = draw_negative(anchor, excluded)
            instances.append(
                TrainingInstance(anchor, candidate, 0, draw_noise(anchor, candidate))
            )

    rng.shuffle(instances)
    yield from instances
