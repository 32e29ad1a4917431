"""Wikidata access: candidate queries, SPARQL execution with caching, target profiles."""

from .cache import CachePolicy, QueryCache, normalize_query, offline_from_env, query_key
from .client import (
    DEFAULT_ENDPOINT,
    candidates_query,
    default_endpoint,
    execute_select,
    fetch_candidates,
    fetch_labels,
    fetch_raw,
    fetch_target_profile,
    parse_candidates,
    resolve_label,
)
from .models import CandidateKind, CandidateRecord, EntityId, Gender, TargetProfile, is_entity_id
from .queries import build_fictional_candidates_query, build_human_candidates_query

__all__ = [
    "DEFAULT_ENDPOINT",
    "CachePolicy",
    "CandidateKind",
    "CandidateRecord",
    "EntityId",
    "Gender",
    "QueryCache",
    "TargetProfile",
    "build_fictional_candidates_query",
    "build_human_candidates_query",
    "candidates_query",
    "default_endpoint",
    "execute_select",
    "fetch_candidates",
    "fetch_labels",
    "fetch_raw",
    "fetch_target_profile",
    "is_entity_id",
    "normalize_query",
    "offline_from_env",
    "parse_candidates",
    "query_key",
    "resolve_label",
]
