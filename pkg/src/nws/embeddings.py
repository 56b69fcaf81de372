"""Loading and lookup of fixed pre-trained word embeddings.

Vectors come from a plain text file (one word followed by its components
per line) and are never modified after loading; training only ever reads
them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoEmbeddingsError


class Vocabulary:
    """Dense bidirectional mapping between word strings and integer ids."""

    def __init__(self, words=()):
        self.id_to_word: list[str] = []
        self.word_to_id: dict[str, int] = {}
        for word in words:
            self.add(word)

    def add(self, word: str) -> int:
        """Insert `word` if new and return its id either way."""
        wid = self.word_to_id.get(word)
        if wid is None:
            wid = len(self.id_to_word)
            self.word_to_id[word] = wid
            self.id_to_word.append(word)
        return wid

    def id_of(self, word: str) -> int | None:
        return self.word_to_id.get(word)

    def word_of(self, wid: int) -> str:
        return self.id_to_word[wid]

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id

    def __len__(self) -> int:
        return len(self.id_to_word)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Vocabulary(size={len(self)})"


@dataclass
class EmbeddingTable:
    """V x d matrix of word vectors; row i belongs to vocabulary id i."""

    vectors: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    def checksum(self) -> str:
        """SHA-256 of the raw vector bytes; used to assert vectors stay fixed."""
        return hashlib.sha256(np.ascontiguousarray(self.vectors).tobytes()).hexdigest()


@dataclass
class EmbeddingLoadReport:
    lines: int = 0
    loaded: int = 0
    skipped_malformed: int = 0
    skipped_nonfinite: int = 0
    skipped_duplicate: int = 0

    @property
    def skipped(self) -> int:
        return self.skipped_malformed + self.skipped_nonfinite + self.skipped_duplicate

    def as_text(self) -> str:
        return "\n".join(
            [
                f"lines: {self.lines}",
                f"loaded: {self.loaded}",
                f"skipped_malformed: {self.skipped_malformed}",
                f"skipped_nonfinite: {self.skipped_nonfinite}",
                f"skipped_duplicate: {self.skipped_duplicate}",
            ]
        )


def _parse_floats(fields: list[str]) -> np.ndarray | None:
    try:
        return np.array([float(f) for f in fields], dtype=np.float64)
    except ValueError:
        return None


def load_embedding_file(
    path: str | Path, cache_path: str | Path | None = None
) -> tuple[Vocabulary, EmbeddingTable, EmbeddingLoadReport]:
    """Load word vectors from a text file.

    Each line holds a word followed by d whitespace-separated numbers; d is
    inferred from the first parsable line. Lines with the wrong field count,
    non-finite numbers, or a word already seen are skipped and counted in the
    returned report. Ids follow file order, so reloading the same file gives
    identical ids.

    When `cache_path` is given, a binary cache is consulted first and
    rewritten whenever the source file's checksum changed.
    """
    path = Path(path)
    if cache_path is not None:
        source_sha = file_sha256(path)
        cached = _read_cache(Path(cache_path), source_sha)
        if cached is not None:
            return cached

    report = EmbeddingLoadReport()
    vocab = Vocabulary()
    rows: list[np.ndarray] = []
    dim: int | None = None

    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            report.lines += 1
            fields = line.split()
            if len(fields) < 2:
                report.skipped_malformed += 1
                continue
            word = fields[0]
            if dim is not None and len(fields) - 1 != dim:
                report.skipped_malformed += 1
                continue
            values = _parse_floats(fields[1:])
            if values is None:
                report.skipped_malformed += 1
                continue
            if not np.all(np.isfinite(values)):
                report.skipped_nonfinite += 1
                continue
            if word in vocab:
                report.skipped_duplicate += 1
                continue
            if dim is None:
                dim = values.shape[0]
            vocab.add(word)
            rows.append(values)
            report.loaded += 1

    if not rows:
        raise NoEmbeddingsError(f"no loadable embedding lines in {path}")

    table = EmbeddingTable(np.vstack(rows))
    if cache_path is not None:
        _write_cache(Path(cache_path), source_sha, vocab, table)
    return vocab, table, report


def vector_of(vocab: Vocabulary, table: EmbeddingTable, word: str) -> np.ndarray | None:
    """Stored row for `word`, or None when the word is unknown.

    Lookup is case-sensitive: the loader stores file tokens verbatim.
    """
    wid = vocab.id_of(word)
    if wid is None:
        return None
    return table.vectors[wid]


def write_embedding_file(path: str | Path, vocab: Vocabulary, table: EmbeddingTable) -> None:
    """Serialize back to the text format; floats use repr for exact round-trip."""
    with open(path, "w", encoding="utf-8") as handle:
        for wid, word in enumerate(vocab.id_to_word):
            values = " ".join(repr(v) for v in table.vectors[wid].tolist())
            handle.write(f"{word} {values}\n")


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


_CACHE_VERSION = 1


def _read_cache(cache_path: Path, source_sha: str):
    if not cache_path.exists():
        return None
    try:
        with np.load(cache_path, allow_pickle=False) as blob:
            if int(blob["version"]) != _CACHE_VERSION or str(blob["source_sha"]) != source_sha:
                return None
            words = [str(w) for w in blob["words"]]
            vectors = np.array(blob["vectors"], dtype=np.float64)
    except (OSError, KeyError, ValueError):
        return None
    vocab = Vocabulary(words)
    report = EmbeddingLoadReport(lines=len(words), loaded=len(words))
    return vocab, EmbeddingTable(vectors), report


def _write_cache(cache_path: Path, source_sha: str, vocab: Vocabulary, table: EmbeddingTable) -> None:
    # np.savez appends ".npz" to bare paths; write through a handle to keep the exact name.
    with open(cache_path, "wb") as handle:
        np.savez(
            handle,
            version=np.int64(_CACHE_VERSION),
            source_sha=np.str_(source_sha),
            words=np.array(vocab.id_to_word, dtype=np.str_),
            vectors=table.vectors,
        )
