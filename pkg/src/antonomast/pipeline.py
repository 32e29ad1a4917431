"""Antonomasia generation: modifier choice, filtering, scoring, ranking, rendering."""

from __future__ import annotations

import enum
import logging
import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .embeddings import Backend, EmbeddingIndex, entity_vector
from .errors import (
    DegenerateModifier,
    DegenerateVector,
    MissingOccupationVector,
    NoOccupation,
    NoViableCandidate,
    OutOfVocabulary,
)
from .vectors import EPS, TranslationalMode, cosine, l1_norm, l2_norm, project_orthogonal, translational_distance
from .wikidata import client as wd
from .wikidata.cache import QueryCache
from .wikidata.models import CandidateKind, CandidateRecord, EntityId, TargetProfile

logger = logging.getLogger(__name__)

SENTENCE_RE = re.compile(r"^.+ (is|was) the .+ of .+$")


class Method(str, enum.Enum):
    PROJECTION = "projection"
    TRANSLATIONAL = "translational"


class SkipReason(str, enum.Enum):
    OUT_OF_VOCABULARY = "OutOfVocabulary"
    SAME_OCCUPATION = "SameOccupation"
    IS_TARGET = "IsTarget"
    DEGENERATE = "Degenerate"
    MISSING_OCCUPATION_VECTOR = "MissingOccupationVector"


@dataclass(frozen=True)
class RankingParams:
    method: Method = Method.PROJECTION
    k: int = 10
    extremal_rerank: bool = True
    translational_mode: TranslationalMode = TranslationalMode.RESIDUAL
    strict_domain: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "translational_mode", TranslationalMode(self.translational_mode))
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")


@dataclass(frozen=True)
class VaCandidateScore:
    candidate: CandidateRecord
    similarity: float | None
    l1: float | None
    skipped_reason: SkipReason | None = None

    def __post_init__(self):
        if (self.similarity is None) == (self.skipped_reason is None):
            raise ValueError("exactly one of similarity / skipped_reason must be set")


@dataclass(frozen=True)
class VaResult:
    target: TargetProfile
    source: CandidateRecord
    modifier_id: EntityId
    modifier_label: str
    verb: str
    sentence: str
    method: Method
    similarity: float
    l1: float
    rank: int

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "sentence": self.sentence,
            "method": self.method.value,
            "similarity": self.similarity,
            "l1": self.l1,
            "verb": self.verb,
            "modifier_id": str(self.modifier_id),
            "modifier_label": self.modifier_label,
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
        }


@dataclass
class GenerationRun:
    results: list[VaResult]
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"results": [r.to_dict() for r in self.results], "provenance": self.provenance}


# -- modifier, filtering -----------------------------------------------------


def select_modifier(profile: TargetProfile) -> tuple[EntityId, str]:
    if not profile.occupations:
        raise NoOccupation(f"{profile.label} ({profile.id}) has no occupation")
    return profile.occupations[0]


def filter_candidates(
    candidates: Iterable[CandidateRecord],
    target: TargetProfile,
    modifier_id: EntityId,
    *,
    strict_domain: bool = False,
    counts: Counter | None = None,
) -> list[CandidateRecord]:
    """Drop the target itself and candidates sharing the modifier occupation.

    With ``strict_domain`` an entity is dropped entirely when any of its
    records carries the modifier occupation.
    """
    candidates = list(candidates)
    counts = counts if counts is not None else Counter()
    excluded: set[str] = set()
    if strict_domain:
        excluded = {c.id for c in candidates if c.occupation_id == modifier_id}
    kept = []
    for c in candidates:
        if c.id == target.id:
            counts[SkipReason.IS_TARGET.value] += 1
        elif c.occupation_id == modifier_id or c.id in excluded:
            counts[SkipReason.SAME_OCCUPATION.value] += 1
        else:
            kept.append(c)
    return kept


# -- scoring and ranking ------------------------------------------------------

ScoringInput = tuple[CandidateRecord, "np.ndarray | None", "np.ndarray | None"]


def score_candidates(
    target_vec,
    modifier_vec,
    candidates: Sequence[ScoringInput],
    params: RankingParams,
) -> list[VaCandidateScore]:
    """Score each (record, vector, occupation vector) triple; output order matches input.

    Candidates that cannot be scored come back with a ``skipped_reason``;
    a degenerate modifier or target image makes the whole batch unscorable.
    """
    a = np.asarray(target_vec, dtype=np.float64)
    c = np.asarray(modifier_vec, dtype=np.float64)
    mode = params.translational_mode
    if params.method is Method.PROJECTION:
        pa = project_orthogonal(a, c)
        if l2_norm(pa) <= EPS:
            raise DegenerateModifier("target lies along the modifier; its projection vanishes")
    elif mode is TranslationalMode.RESIDUAL and l2_norm(a - c) <= EPS:
        raise DegenerateModifier("target equals the modifier; residual vanishes")
    elif mode is TranslationalMode.PLAIN and l2_norm(a) <= EPS:
        raise DegenerateModifier("target vector is zero")

    out: list[VaCandidateScore] = []
    for record, b, occ in candidates:
        if b is None:
            out.append(VaCandidateScore(record, None, None, SkipReason.OUT_OF_VOCABULARY))
            continue
        l1 = l1_norm(b)
        try:
            if params.method is Method.PROJECTION:
                sim = cosine(project_orthogonal(b, c), pa)
            else:
                sim = translational_distance(a, c, b, occ, mode)
        except MissingOccupationVector:
            out.append(VaCandidateScore(record, None, l1, SkipReason.MISSING_OCCUPATION_VECTOR))
            continue
        except DegenerateVector:
            out.append(VaCandidateScore(record, None, l1, SkipReason.DEGENERATE))
            continue
        out.append(VaCandidateScore(record, sim, l1))
    return out


def rank(scored: Iterable[VaCandidateScore], params: RankingParams) -> list[VaCandidateScore]:
    """Top-k by similarity (ties by id), optionally re-sorted by descending L1 norm."""
    live = [s for s in scored if s.skipped_reason is None]
    live.sort(key=lambda s: (-s.similarity, str(s.candidate.id)))
    top = live[: params.k]
    if params.extremal_rerank:
        top.sort(key=lambda s: -s.l1)
    return top


def best_per_entity(scored: Iterable[VaCandidateScore]) -> list[VaCandidateScore]:
    """Keep one score per candidate entity: its highest-similarity record (first on ties)."""
    best: dict[str, VaCandidateScore] = {}
    order: list[str] = []
    for s in scored:
        key = s.candidate.id
        if key not in best:
            best[key] = s
            order.append(key)
            continue
        cur = best[key]
        if s.skipped_reason is None and (cur.skipped_reason is not None or s.similarity > cur.similarity):
            best[key] = s
    return [best[k] for k in order]


# -- surface realization ------------------------------------------------------


def select_verb(profile: TargetProfile) -> str:
    return "was" if profile.has_date_of_death else "is"


_IRREGULAR = {
    "person": "people",
    "businessperson": "businesspeople",
    "man": "men",
    "woman": "women",
    "child": "children",
    "chief": "chiefs",
    "roof": "roofs",
    "wife": "wives",
    "thief": "thieves",
    "alumnus": "alumni",
    "genus": "genera",
    "series": "series",
    "species": "species",
    "clergy": "clergy",
    "staff": "staff",
    "aircraft": "aircraft",
}
# compounds such as "businessman"; these look like "-man" but are not
_MAN_NOT_MEN = {"human", "german", "shaman", "talisman", "caiman", "ottoman", "roman"}
_VOWELS = set("aeiou")


def _plural_word(word: str) -> str:
    lower = word.lower()
    if lower in _IRREGULAR:
        plural = _IRREGULAR[lower]
        return word[0] + plural[1:] if word[:1].isupper() else plural
    if lower.endswith("man") and lower not in _MAN_NOT_MEN:
        return word[:-3] + ("MEN" if word[-3:].isupper() else word[-3] + "en")
    if lower.endswith("person"):
        return word[: -len("person")] + "people"
    if lower.endswith(("s", "x", "z", "ch", "sh")):
        return word + "es"
    if lower.endswith("y") and len(lower) > 1 and lower[-2] not in _VOWELS:
        return word[:-1] + "ies"
    return word + "s"


def pluralize_modifier(label: str) -> str:
    """Plural of an occupation label; only the final word is inflected."""
    if not label.strip():
        raise ValueError("cannot pluralize an empty label")
    head, sep, last = label.rstrip().rpartition(" ")
    return f"{head}{sep}{_plural_word(last)}"


def render_va(target_label: str, verb: str, source_label: str, modifier_plural: str) -> str:
    for name, value in (("target", target_label), ("verb", verb), ("source", source_label), ("modifier", modifier_plural)):
        if not value:
            raise ValueError(f"{name} must be non-empty")
    return f"{target_label} {verb} the {source_label} of {modifier_plural}"


# -- end to end ----------------------------------------------------------------


def generate_from(
    profile: TargetProfile,
    candidates: Sequence[CandidateRecord],
    index: EmbeddingIndex,
    params: RankingParams,
    *,
    provenance: dict | None = None,
) -> GenerationRun:
    """Run the pipeline on an already-fetched profile and candidate pool."""
    modifier_id, modifier_label = select_modifier(profile)
    counts: Counter = Counter()
    pool = filter_candidates(candidates, profile, modifier_id, strict_domain=params.strict_domain, counts=counts)

    a = entity_vector(index, profile.id, profile.label)
    if a is None:
        raise OutOfVocabulary({"target_out_of_vocabulary": 1})
    c = entity_vector(index, modifier_id, modifier_label)
    if c is None:
        raise OutOfVocabulary({"modifier_out_of_vocabulary": 1})

    inputs = [
        (rec, entity_vector(index, rec.id, rec.label), entity_vector(index, rec.occupation_id, rec.occupation_label))
        for rec in pool
    ]
    scored = score_candidates(a, c, inputs, params)
    for s in scored:
        if s.skipped_reason is not None:
            counts[s.skipped_reason.value] += 1
    ranked = rank(best_per_entity(scored), params)
    if not ranked:
        raise NoViableCandidate(counts)

    verb = select_verb(profile)
    plural = pluralize_modifier(modifier_label)
    results = [
        VaResult(
            target=profile,
            source=s.candidate,
            modifier_id=modifier_id,
            modifier_label=plural,
            verb=verb,
            sentence=render_va(profile.label, verb, s.candidate.label, plural),
            method=params.method,
            similarity=s.similarity,
            l1=s.l1,
            rank=i,
        )
        for i, s in enumerate(ranked, start=1)
    ]
    prov = dict(provenance or {})
    prov.update(
        {
            "target_id": str(profile.id),
            "method": params.method.value,
            "k": params.k,
            "extremal_rerank": params.extremal_rerank,
            "translational_mode": params.translational_mode.value,
            "strict_domain": params.strict_domain,
            "backend": index.backend.value,
            "modifier": [str(modifier_id), modifier_label],
            "occupation_order": "endpoint order; first listed occupation is the modifier",
            "candidates_total": len(candidates),
            "candidates_scored": sum(1 for s in scored if s.skipped_reason is None),
            "skipped": dict(sorted(counts.items())),
        }
    )
    return GenerationRun(results, prov)


@dataclass
class SourceConfig:
    """Where candidates and the target profile come from."""

    cache: QueryCache
    endpoint: str | None = None
    kinds: tuple[str, ...] = ("fictional", "human")
    min_sitelinks: dict[str, int] = field(default_factory=dict)
    page_size: int = 5000
    max_rows: int = 50000
    transport: object | None = None


def generate(target: str, params: RankingParams, index: EmbeddingIndex, source: SourceConfig) -> GenerationRun:
    """Fetch the target profile and candidate pools, then run the pipeline."""
    kw = {"transport": source.transport} if source.transport is not None else {}
    profile = wd.fetch_target_profile(target, source.cache, source.endpoint, **kw)
    candidates: list[CandidateRecord] = []
    diag: Counter = Counter()
    for kind in source.kinds:
        kind = CandidateKind(kind)
        candidates += wd.fetch_candidates(
            kind,
            source.cache,
            source.endpoint,
            min_sitelinks=source.min_sitelinks.get(kind.value),
            page_size=source.page_size,
            max_rows=source.max_rows,
            diagnostics=diag,
            **kw,
        )
    if index.backend is Backend.WORD:
        candidates = _with_occupation_labels(candidates, source, kw)
    prov = {"parse_dropped": dict(sorted(diag.items())), "cache_keys": list(source.cache.used_keys)}
    run = generate_from(profile, candidates, index, params, provenance=prov)
    run.provenance["cache_keys"] = list(source.cache.used_keys)
    return run


def _with_occupation_labels(candidates, source: SourceConfig, kw) -> list[CandidateRecord]:
    missing = {c.occupation_id for c in candidates if not c.occupation_label}
    if not missing:
        return list(candidates)
    labels = wd.fetch_labels(missing, source.cache, source.endpoint, **kw)
    return [
        replace(c, occupation_label=labels.get(c.occupation_id, "")) if not c.occupation_label else c
        for c in candidates
    ]
