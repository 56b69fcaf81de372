"""Exception types shared across the package."""


class NwsError(Exception):
    """Base class for all errors raised by this package."""


class NoEmbeddingsError(NwsError):
    """Embedding file contained zero loadable vectors."""


class CorpusIOError(NwsError):
    """Corpus stream could not be read; carries the failing byte offset."""

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class EmptyCorpusError(NwsError):
    """Corpus has no sentence with at least one in-vocabulary token."""


class CorpusTooSmallError(NwsError):
    """Too few trainable sentences for the requested noise-set size."""


class UnembeddableSentenceError(NwsError):
    """Sentence has no in-vocabulary words and cannot be embedded."""


class ZeroVarianceError(NwsError):
    """Correlation input is constant."""


class InsufficientPairsError(NwsError):
    """Fewer scorable items than the correlation requires."""


class DatasetFormatError(NwsError):
    """Dataset file is unusable (for example, every line malformed)."""


class ScoreFileError(NwsError):
    """Score TSV is missing its header or otherwise unparsable."""


class TrainingDivergedError(NwsError):
    """Mean epoch loss became non-finite; training aborted."""
