"""Exception hierarchy shared by every antonomast module."""

from __future__ import annotations

from collections.abc import Mapping, Sequence


class AntonomastError(Exception):
    """Base class for all errors raised by this package."""


# -- wikidata client ---------------------------------------------------------


class NetworkError(AntonomastError):
    """Transport failure that persisted after all retry attempts."""


class EndpointError(AntonomastError):
    """The SPARQL endpoint answered with a non-2xx status."""

    def __init__(self, status: int, body: str):
        super().__init__(f"endpoint returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class CacheMiss(AntonomastError):
    """Read-only cache does not hold the requested query."""

    def __init__(self, key: str, query: str = ""):
        super().__init__(f"no cached response for {key}")
        self.key = key
        self.query = query


class MalformedResponse(AntonomastError):
    """A response document does not have the SPARQL-Results shape."""


class EntityNotFound(AntonomastError):
    pass


class AmbiguousLabel(AntonomastError):
    def __init__(self, label: str, ids: Sequence[str]):
        super().__init__(f"label {label!r} matches {len(ids)} equally popular items: {', '.join(ids)}")
        self.label = label
        self.ids = list(ids)


class NoOccupation(AntonomastError):
    """The target has no occupation, so no modifier can be chosen."""


# -- embeddings / vectors ----------------------------------------------------


class DimensionMismatch(AntonomastError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(AntonomastError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyFile(AntonomastError):
    pass


class WrongBackend(AntonomastError):
    pass


class DegenerateVector(AntonomastError):
    """A vector's Euclidean norm is below the degeneracy threshold."""


class DegenerateModifier(DegenerateVector):
    """The modifier vector (or the target's image under it) is degenerate."""


class MissingOccupationVector(AntonomastError):
    pass


# -- pipeline ----------------------------------------------------------------


class NoViableCandidate(AntonomastError):
    def __init__(self, counts: Mapping[str, int]):
        detail = ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "empty pool"
        super().__init__(f"no viable candidate ({detail})")
        self.counts = dict(counts)


# -- llm baseline ------------------------------------------------------------


class FixtureMiss(AntonomastError):
    def __init__(self, key: str):
        super().__init__(f"no recorded completion for prompt {key}")
        self.key = key


class TransportError(AntonomastError):
    pass


class OutOfVocabulary(NoViableCandidate):
    """The target or modifier itself has no vector, so nothing can be scored."""
