"""SPARQL query text for candidate extraction and target lookup.

The two candidate queries reproduce the published extraction queries
(fictional characters, and popular humans in six domains). The second one is
printed with a missing ``;`` and closing brace; the text here is the
syntactically repaired version.
"""

from __future__ import annotations

from collections.abc import Iterable

from .models import EntityId

FICTIONAL_CHARACTER = "Q15632617"
HUMAN = "Q5"
COMPUTER_SCIENTIST = "Q82594"
MATHEMATICIAN = "Q170790"
POLITICIAN = "Q82955"
ENTREPRENEUR = "Q131524"

_FICTIONAL = """\
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
PREFIX wd: <http://www.wikidata.org/entity/>
SELECT DISTINCT ?item ?itemLabel ?occupation ?sitelinks WHERE {{
    ?item wdt:P31 wd:Q15632617; #fictional characters
    wdt:P106 ?occupation;
    wikibase:sitelinks ?sitelinks .
    FILTER({min_sitelinks} < ?sitelinks).
    SERVICE wikibase:label {{bd:serviceParam
        wikibase:language "[AUTO_LANGUAGE],en".}}}}
"""

_HUMAN = """\
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
PREFIX wd: <http://www.wikidata.org/entity/>
SELECT DISTINCT ?item ?itemLabel ?occupation ?sitelinks WHERE {{
    ?item wdt:P31 wd:Q5;
        wdt:P106 ?occupation;
        wikibase:sitelinks ?sitelinks.
        {{?item wdt:P641 ?sport.}} #people who do sports
UNION {{?item wdt:P106 wd:Q82594.}} #computer scientists
UNION {{?item wdt:P106 wd:Q170790.}} #mathematicians
UNION {{?item wdt:P106 wd:Q82955.}} #politicians
UNION {{?item wdt:P106 wd:Q131524.}} #entrepreneurs
UNION {{?item wdt:P1303 ?instrument.}} #people who play an instrument
UNION {{?item wdt:P136 ?genre.}} #people who have a genre
FILTER({min_sitelinks} <= ?sitelinks).
SERVICE wikibase:label{{ bd:serviceParam
    wikibase:language "[AUTO_LANGUAGE],en". }}
}}
"""


def _check_threshold(min_sitelinks: int) -> int:
    if isinstance(min_sitelinks, bool) or not isinstance(min_sitelinks, int) or min_sitelinks < 0:
        raise ValueError(f"min_sitelinks must be a non-negative integer, got {min_sitelinks!r}")
    return min_sitelinks


def build_fictional_candidates_query(min_sitelinks: int = 30) -> str:
    return _FICTIONAL.format(min_sitelinks=_check_threshold(min_sitelinks))


def build_human_candidates_query(min_sitelinks: int = 70) -> str:
    return _HUMAN.format(min_sitelinks=_check_threshold(min_sitelinks))


def paginate(query: str, limit: int, offset: int) -> str:
    return f"{query.rstrip()}\nLIMIT {limit} OFFSET {offset}\n"


def escape_literal(value: str) -> str:
    return (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def build_label_resolution_query(label: str) -> str:
    """Items whose English label or alias is exactly ``label``, with their sitelinks."""
    lit = escape_literal(label)
    return f"""\
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
PREFIX skos: <http://www.w3.org/2004/02/skos/core#>
SELECT DISTINCT ?item ?sitelinks WHERE {{
  {{ ?item rdfs:label "{lit}"@en . }} UNION {{ ?item skos:altLabel "{lit}"@en . }}
  ?item wikibase:sitelinks ?sitelinks .
}}
"""


def build_profile_query(entity: EntityId) -> str:
    """Label, occupations (P106), sex or gender (P21) and date-of-death (P570) presence."""
    return f"""\
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
PREFIX wd: <http://www.wikidata.org/entity/>
SELECT ?item ?itemLabel ?sitelinks ?occupation ?occupationLabel ?gender ?dead WHERE {{
  VALUES ?item {{ wd:{entity} }}
  OPTIONAL {{ ?item wikibase:sitelinks ?sitelinks . }}
  OPTIONAL {{ ?item wdt:P106 ?occupation . }}
  OPTIONAL {{ ?item wdt:P21 ?gender . }}
  BIND(EXISTS {{ ?item wdt:P570 ?dateOfDeath . }} AS ?dead)
  SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en". }}
}}
"""


def build_labels_query(ids: Iterable[EntityId]) -> str:
    values = " ".join(f"wd:{i}" for i in ids)
    return f"""\
PREFIX wd: <http://www.wikidata.org/entity/>
SELECT ?item ?itemLabel WHERE {{
  VALUES ?item {{ {values} }}
  SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en". }}
}}
"""
