"""Execute SELECT queries against a Wikidata-compatible SPARQL endpoint."""

from __future__ import annotations

import email.utils
import json
import logging
import os
import time
from collections import Counter
from collections.abc import Callable, Iterable
from datetime import datetime, timezone

from ..errors import (
    AmbiguousLabel,
    EndpointError,
    EntityNotFound,
    MalformedResponse,
    NetworkError,
    NoOccupation,
)
from ..http import USER_AGENT, RequestsTransport, Transport
from .cache import QueryCache
from .models import (
    DEFAULT_MIN_SITELINKS,
    ENTITY_PREFIX,
    GENDER_ITEMS,
    CandidateKind,
    CandidateRecord,
    EntityId,
    Gender,
    TargetProfile,
    is_entity_id,
    passes_sitelinks,
)
from .queries import (
    build_fictional_candidates_query,
    build_human_candidates_query,
    build_label_resolution_query,
    build_labels_query,
    build_profile_query,
    paginate,
)

logger = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://query.wikidata.org/sparql"
PAGE_SIZE = 5000
MAX_ROWS = 50000
ATTEMPTS = 3
BACKOFF = 1.0
_GET_LIMIT = 1800  # longer queries go in a POST body
_RETRY_STATUS = {429, 500, 502, 503, 504}

_default_transport: Transport | None = None


def default_endpoint() -> str:
    return os.environ.get("ANTONOMAST_ENDPOINT") or DEFAULT_ENDPOINT


def _transport() -> Transport:
    global _default_transport
    if _default_transport is None:
        _default_transport = RequestsTransport()
    return _default_transport


def _retry_after(value: str | None) -> float | None:
    if not value:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        pass
    try:
        when = email.utils.parsedate_to_datetime(value)
    except (TypeError, ValueError):
        return None
    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    return max(0.0, (when - datetime.now(timezone.utc)).total_seconds())


def fetch_raw(
    query: str,
    endpoint: str,
    *,
    transport: Transport | None = None,
    attempts: int = ATTEMPTS,
    backoff: float = BACKOFF,
    sleep: Callable[[float], None] = time.sleep,
    timeout: float = 60.0,
) -> bytes:
    """Send one SELECT to the endpoint and return the raw response body."""
    if not endpoint.startswith(("http://", "https://")):
        raise ValueError(f"endpoint must be an absolute http(s) URL: {endpoint!r}")
    transport = transport or _transport()
    headers = {"Accept": "application/sparql-results+json", "User-Agent": USER_AGENT}
    if len(query) > _GET_LIMIT:
        method, params, data = "POST", None, {"query": query}
    else:
        method, params, data = "GET", {"query": query}, None

    delay = backoff
    last_exc: Exception | None = None
    for attempt in range(1, attempts + 1):
        try:
            resp = transport.send(method, endpoint, params=params, data=data, headers=headers, timeout=timeout)
        except OSError as exc:
            last_exc = exc
            logger.warning("SPARQL transport failure (attempt %d/%d): %s", attempt, attempts, exc)
            if attempt < attempts:
                sleep(delay)
                delay *= 2
            continue
        if resp.ok:
            return resp.body
        if resp.status in _RETRY_STATUS and attempt < attempts:
            wait = _retry_after(resp.headers.get("Retry-After") or resp.headers.get("retry-after"))
            sleep(delay if wait is None else wait)
            delay *= 2
            continue
        raise EndpointError(resp.status, resp.text())
    raise NetworkError(f"SPARQL request failed after {attempts} attempts: {last_exc}")


def _decode(body: bytes) -> dict:
    try:
        doc = json.loads(body)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedResponse(f"response is not JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("results"), dict) or not isinstance(
        doc["results"].get("bindings"), list
    ):
        raise MalformedResponse("response lacks results.bindings")
    return doc


def execute_select(
    query: str,
    cache: QueryCache,
    endpoint: str | None = None,
    *,
    transport: Transport | None = None,
    **fetch_kw,
) -> dict:
    """Run ``query`` through the cache and return the SPARQL-Results document."""
    body = cache.get(query)
    if body is None:
        body = fetch_raw(query, endpoint or default_endpoint(), transport=transport, **fetch_kw)
        doc = _decode(body)
        cache.put(query, body)
        return doc
    return _decode(body)


# -- binding helpers ---------------------------------------------------------


def _value(row: dict, var: str) -> str | None:
    cell = row.get(var)
    if not isinstance(cell, dict):
        return None
    v = cell.get("value")
    return v if isinstance(v, str) else None


def _entity(row: dict, var: str) -> EntityId | None:
    cell = row.get(var)
    if not isinstance(cell, dict) or cell.get("type") != "uri":
        return None
    iri = cell.get("value", "")
    if not iri.startswith(ENTITY_PREFIX) or not is_entity_id(iri[len(ENTITY_PREFIX):]):
        return None
    return EntityId(iri[len(ENTITY_PREFIX):])


def _int(row: dict, var: str) -> int | None:
    v = _value(row, var)
    if v is None:
        return None
    try:
        n = int(v)
    except ValueError:
        return None
    return n if n >= 0 else None


def parse_candidates(
    doc: dict,
    kind: CandidateKind | str,
    min_sitelinks: int | None = None,
    *,
    diagnostics: Counter | None = None,
) -> list[CandidateRecord]:
    """Materialize candidate rows, dropping ones that fail the popularity bound or lack a label.

    A row without a valid ``item`` entity IRI aborts with MalformedResponse.
    Duplicate (item, occupation) pairs keep their first occurrence.
    """
    kind = CandidateKind(kind)
    if min_sitelinks is None:
        min_sitelinks = DEFAULT_MIN_SITELINKS[kind]
    diag = diagnostics if diagnostics is not None else Counter()
    try:
        rows = doc["results"]["bindings"]
    except (KeyError, TypeError):
        raise MalformedResponse("document lacks results.bindings") from None

    seen: set[tuple[str, str]] = set()
    out: list[CandidateRecord] = []
    for n, row in enumerate(rows):
        item = _entity(row, "item")
        if item is None:
            raise MalformedResponse(f"binding row {n} has no Wikidata item IRI")
        label = _value(row, "itemLabel")
        occupation = _entity(row, "occupation")
        sitelinks = _int(row, "sitelinks")
        if not label:
            diag["missing_label"] += 1
            continue
        if occupation is None:
            diag["bad_occupation"] += 1
            continue
        if sitelinks is None:
            diag["bad_sitelinks"] += 1
            continue
        if not passes_sitelinks(kind, sitelinks, min_sitelinks):
            diag["below_sitelinks"] += 1
            continue
        if (item, occupation) in seen:
            diag["duplicate"] += 1
            continue
        seen.add((item, occupation))
        out.append(
            CandidateRecord(
                id=item,
                label=label,
                occupation_id=occupation,
                occupation_label=_value(row, "occupationLabel") or "",
                sitelinks=sitelinks,
                kind=kind,
            )
        )
    dropped = sum(v for k, v in diag.items() if k != "duplicate")
    if dropped or diag["duplicate"]:
        logger.info("parsed %d %s candidates; dropped %s", len(out), kind.value, dict(diag))
    return out


def candidates_query(kind: CandidateKind | str, min_sitelinks: int | None = None) -> str:
    kind = CandidateKind(kind)
    if min_sitelinks is None:
        min_sitelinks = DEFAULT_MIN_SITELINKS[kind]
    if kind is CandidateKind.FICTIONAL:
        return build_fictional_candidates_query(min_sitelinks)
    return build_human_candidates_query(min_sitelinks)


def fetch_candidates(
    kind: CandidateKind | str,
    cache: QueryCache,
    endpoint: str | None = None,
    *,
    min_sitelinks: int | None = None,
    page_size: int = PAGE_SIZE,
    max_rows: int = MAX_ROWS,
    transport: Transport | None = None,
    diagnostics: Counter | None = None,
    **fetch_kw,
) -> list[CandidateRecord]:
    """Page through a candidate query with LIMIT/OFFSET and parse all rows."""
    kind = CandidateKind(kind)
    if min_sitelinks is None:
        min_sitelinks = DEFAULT_MIN_SITELINKS[kind]
    base = candidates_query(kind, min_sitelinks)
    rows: list[dict] = []
    offset = 0
    while offset < max_rows:
        limit = min(page_size, max_rows - offset)
        doc = execute_select(paginate(base, limit, offset), cache, endpoint, transport=transport, **fetch_kw)
        page = doc["results"]["bindings"]
        rows.extend(page)
        if len(page) < limit:
            break
        offset += limit
    return parse_candidates({"results": {"bindings": rows}}, kind, min_sitelinks, diagnostics=diagnostics)


def fetch_labels(
    ids: Iterable[EntityId],
    cache: QueryCache,
    endpoint: str | None = None,
    *,
    batch: int = 200,
    transport: Transport | None = None,
    **fetch_kw,
) -> dict[EntityId, str]:
    wanted = sorted(set(ids))
    labels: dict[EntityId, str] = {}
    for i in range(0, len(wanted), batch):
        doc = execute_select(
            build_labels_query(wanted[i : i + batch]), cache, endpoint, transport=transport, **fetch_kw
        )
        for row in doc["results"]["bindings"]:
            item = _entity(row, "item")
            label = _value(row, "itemLabel")
            if item is not None and label:
                labels[item] = label
    return labels


def resolve_label(
    label: str,
    cache: QueryCache,
    endpoint: str | None = None,
    *,
    transport: Transport | None = None,
    **fetch_kw,
) -> EntityId:
    """Map an English label or alias to the most-linked matching item."""
    doc = execute_select(build_label_resolution_query(label), cache, endpoint, transport=transport, **fetch_kw)
    best: dict[EntityId, int] = {}
    for row in doc["results"]["bindings"]:
        item = _entity(row, "item")
        links = _int(row, "sitelinks")
        if item is None or links is None:
            continue
        best[item] = max(links, best.get(item, -1))
    if not best:
        raise EntityNotFound(f"no Wikidata item labelled {label!r}")
    top = max(best.values())
    tied = sorted(i for i, n in best.items() if n == top)
    if len(tied) > 1:
        raise AmbiguousLabel(label, tied)
    return tied[0]


def fetch_target_profile(
    label_or_id: str,
    cache: QueryCache,
    endpoint: str | None = None,
    *,
    require_occupation: bool = True,
    transport: Transport | None = None,
    **fetch_kw,
) -> TargetProfile:
    """Build a TargetProfile; occupations keep the order the endpoint returned them in."""
    if not label_or_id or not label_or_id.strip():
        raise ValueError("target must be a Wikidata id or a non-empty label")
    if is_entity_id(label_or_id):
        entity = EntityId(label_or_id)
    else:
        entity = resolve_label(label_or_id.strip(), cache, endpoint, transport=transport, **fetch_kw)

    doc = execute_select(build_profile_query(entity), cache, endpoint, transport=transport, **fetch_kw)
    rows = doc["results"]["bindings"]
    if not rows or all(_value(r, "sitelinks") is None for r in rows):
        raise EntityNotFound(f"{entity} does not exist on the endpoint")

    label = next((v for r in rows if (v := _value(r, "itemLabel"))), str(entity))
    occupations: list[tuple[EntityId, str]] = []
    seen: set[EntityId] = set()
    gender = Gender.UNKNOWN
    dead = False
    for r in rows:
        occ = _entity(r, "occupation")
        if occ is not None and occ not in seen:
            seen.add(occ)
            occupations.append((occ, _value(r, "occupationLabel") or str(occ)))
        g = _entity(r, "gender")
        if gender is Gender.UNKNOWN and g is not None:
            gender = GENDER_ITEMS.get(g, Gender.UNKNOWN)
        if (_value(r, "dead") or "").lower() in {"true", "1"}:
            dead = True

    if require_occupation and not occupations:
        raise NoOccupation(f"{label} ({entity}) has no occupation statement")
    return TargetProfile(
        id=entity, label=label, occupations=tuple(occupations), has_date_of_death=dead, gender=gender
    )
