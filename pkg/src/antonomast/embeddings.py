"""Pre-trained embedding files: loading, lookup, multiword label composition."""

from __future__ import annotations

import enum
import logging
import re
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from os import PathLike
from types import MappingProxyType

import numpy as np

from .errors import DimensionMismatch, EmptyFile, ParseError, WrongBackend
from .wikidata.models import is_entity_id

logger = logging.getLogger(__name__)

_TOKEN_SPLIT = re.compile(r"[\s\-]+")


class Backend(str, enum.Enum):
    KNOWLEDGE_GRAPH = "kg"
    WORD = "word"


@dataclass(frozen=True, eq=False)
class EmbeddingIndex:
    backend: Backend
    dim: int
    entries: Mapping[str, np.ndarray]
    diagnostics: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingIndex):
            return NotImplemented
        return (
            self.backend is other.backend
            and self.dim == other.dim
            and self.entries.keys() == other.entries.keys()
            and all(np.array_equal(v, other.entries[k]) for k, v in self.entries.items())
        )

    __hash__ = None

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    @classmethod
    def from_mapping(cls, backend: Backend | str, vectors: Mapping[str, object]) -> "EmbeddingIndex":
        """Build an index from in-memory vectors (tests, synthetic data)."""
        backend = Backend(backend)
        entries: dict[str, np.ndarray] = {}
        dim = None
        for key, values in vectors.items():
            v = np.array(values, dtype=np.float64)
            if v.ndim != 1 or v.size == 0:
                raise ValueError(f"{key!r}: vector must be non-empty and one-dimensional")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{key!r}: non-finite component")
            if dim is None:
                dim = v.size
            elif v.size != dim:
                raise DimensionMismatch(f"{key!r} has dimension {v.size}, expected {dim}")
            _check_key(backend, key)
            v.flags.writeable = False
            entries[key] = v
        if dim is None:
            raise EmptyFile("no vectors given")
        return cls(backend, dim, MappingProxyType(entries))

    def scaled(self, factor: float) -> "EmbeddingIndex":
        return EmbeddingIndex.from_mapping(self.backend, {k: v * factor for k, v in self.entries.items()})


def _check_key(backend: Backend, key: str) -> None:
    if backend is Backend.KNOWLEDGE_GRAPH:
        if not is_entity_id(key):
            raise ValueError(f"knowledge-graph key {key!r} is not a Wikidata id")
    elif key != key.lower() or not key or any(ch.isspace() for ch in key):
        raise ValueError(f"word key {key!r} must be a lowercase token")


def _is_header(tokens: list[str]) -> bool:
    return len(tokens) == 2 and all(t.isdigit() for t in tokens)


def load_text_embeddings(path: str | PathLike, backend: Backend | str) -> EmbeddingIndex:
    """Read ``key v1 ... vd`` lines, with an optional ``count dim`` header line.

    Word keys are lowercased; knowledge-graph keys must be Wikidata ids and
    other keys are skipped. The first occurrence of a duplicate key wins.
    """
    backend = Backend(backend)
    entries: dict[str, np.ndarray] = {}
    diag: Counter = Counter()
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if lineno == 1 and _is_header(tokens):
                continue
            key, raw = tokens[0], tokens[1:]
            try:
                values = np.array([float(t) for t in raw], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"non-numeric component in record {key!r}: {exc}", lineno) from None
            if dim is None:
                if values.size == 0:
                    raise ParseError(f"record {key!r} has no components", lineno)
                dim = values.size
            elif values.size != dim:
                raise DimensionMismatch(f"record {key!r} has {values.size} components, expected {dim}", lineno)
            if not np.all(np.isfinite(values)):
                raise ParseError(f"non-finite component in record {key!r}", lineno)
            if backend is Backend.WORD:
                key = key.lower()
            elif not is_entity_id(key):
                diag["non_entity_key"] += 1
                continue
            if key in entries:
                diag["duplicate"] += 1
                continue
            values.flags.writeable = False
            entries[key] = values
    if dim is None or not entries:
        raise EmptyFile(f"{path}: no embedding records")
    if diag:
        logger.info("loaded %d vectors from %s; skipped %s", len(entries), path, dict(diag))
    return EmbeddingIndex(backend, dim, MappingProxyType(entries), MappingProxyType(dict(diag)))


def lookup(index: EmbeddingIndex, key: str) -> np.ndarray | None:
    return index.entries.get(key)


def tokenize_label(label: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(label.lower()) if t]


def label_vector(index: EmbeddingIndex, label: str, *, diagnostics: Counter | None = None) -> np.ndarray | None:
    """Mean of the vectors of the label's in-vocabulary tokens, or None if none are known.

    Tokens come from lowercasing and splitting on whitespace and hyphens.
    ``diagnostics`` (if given) accumulates ``tokens_found`` / ``tokens_total``.
    """
    if index.backend is not Backend.WORD:
        raise WrongBackend("label_vector needs a word-embedding index")
    tokens = tokenize_label(label)
    found = [v for t in tokens if (v := index.entries.get(t)) is not None]
    if diagnostics is not None:
        diagnostics["tokens_total"] += len(tokens)
        diagnostics["tokens_found"] += len(found)
    if not found:
        return None
    if len(found) == 1:
        return found[0]
    return np.mean(np.stack(found), axis=0)


def entity_vector(index: EmbeddingIndex, entity_id: str, label: str) -> np.ndarray | None:
    """Vector for an entity: its id in a KG index, its label in a word index."""
    if index.backend is Backend.KNOWLEDGE_GRAPH:
        return lookup(index, entity_id)
    return label_vector(index, label)
