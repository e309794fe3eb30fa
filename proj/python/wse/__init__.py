"""Python bindings for the word sense extension library."""

from ._core import (
    DataError,
    InvariantError,
    UsageError,
    corpus_stats,
    exemplar_score,
    prototype_score,
    run,
    typevec,
    wu_palmer,
)

__all__ = [
    "DataError",
    "InvariantError",
    "UsageError",
    "corpus_stats",
    "exemplar_score",
    "prototype_score",
    "run",
    "typevec",
    "wu_palmer",
]
