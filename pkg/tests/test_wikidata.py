import json
from collections import Counter

import pytest
from conftest import FIXTURES, GOLDEN

from antonomast.errors import (
    AmbiguousLabel,
    CacheMiss,
    EndpointError,
    EntityNotFound,
    MalformedResponse,
    NetworkError,
    NoOccupation,
)
from antonomast.http import Response
from antonomast.wikidata import (
    CachePolicy,
    CandidateKind,
    EntityId,
    Gender,
    QueryCache,
    build_fictional_candidates_query,
    build_human_candidates_query,
    execute_select,
    fetch_candidates,
    fetch_target_profile,
    normalize_query,
    parse_candidates,
    query_key,
)
from antonomast.wikidata.client import fetch_raw
from antonomast.wikidata.queries import build_label_resolution_query, build_profile_query, paginate

E = "http://www.wikidata.org/entity/"


def golden(name):
    lines = (GOLDEN / name).read_text().splitlines()
    return normalize_query("\n".join(l for l in lines if not l.startswith("#")))


def row(item, label, occ, links, **extra):
    r = {"item": {"type": "uri", "value": E + item}, "occupation": {"type": "uri", "value": E + occ},
         "sitelinks": {"type": "literal", "value": str(links)}}
    if label is not None:
        r["itemLabel"] = {"type": "literal", "value": label}
    r.update(extra)
    return r


def doc(*rows):
    return {"head": {"vars": ["item", "itemLabel", "occupation", "sitelinks"]}, "results": {"bindings": list(rows)}}


def ok(payload, status=200, headers=None):
    body = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
    return Response(status, body, headers or {})


# -- identifiers ---------------------------------------------------------------


@pytest.mark.parametrize("value", ["Q42", "P106", "Q15632617"])
def test_entity_id_accepts(value):
    assert EntityId(value) == value


@pytest.mark.parametrize("value", ["q42", "Q", "Q4a", "X42", " Q42", ""])
def test_entity_id_rejects(value):
    with pytest.raises(ValueError):
        EntityId(value)


# -- query builders ------------------------------------------------------------


def test_fictional_query_matches_golden():
    assert normalize_query(build_fictional_candidates_query(30)) == golden("fictional_candidates.rq")


def test_human_query_matches_golden():
    assert normalize_query(build_human_candidates_query(70)) == golden("human_candidates.rq")


def test_fictional_query_threshold():
    q = build_fictional_candidates_query(30)
    assert "FILTER(30 < ?sitelinks)" in q and "wd:Q15632617" in q
    assert "FILTER(0 < ?sitelinks)" in build_fictional_candidates_query(0)
    assert build_fictional_candidates_query(30) == build_fictional_candidates_query(30)


def test_human_query_branches():
    q = build_human_candidates_query(70)
    assert "FILTER(70 <= ?sitelinks)" in q
    for branch in ["wdt:P641 ?sport", "wd:Q82594", "wd:Q170790", "wd:Q82955", "wd:Q131524",
                   "wdt:P1303 ?instrument", "wdt:P136 ?genre"]:
        assert branch in q
    assert q.count("UNION") == 6
    assert "FILTER(0 <= ?sitelinks)" in build_human_candidates_query(0)


@pytest.mark.parametrize("bad", [-1, 1.5, "30", True])
def test_query_threshold_validation(bad):
    with pytest.raises(ValueError):
        build_fictional_candidates_query(bad)


def test_label_query_escapes_quotes():
    q = build_label_resolution_query('Dwayne "The Rock" Johnson')
    assert r'"Dwayne \"The Rock\" Johnson"@en' in q


# -- cache ---------------------------------------------------------------------


def test_cache_key_is_whitespace_insensitive():
    assert query_key("SELECT  ?x\nWHERE {}") == query_key(" SELECT ?x WHERE {} ")
    assert len(query_key("x")) == 64


def test_readwrite_persists_and_hits(tmp_path, fake_transport):
    body = json.dumps(doc(row("Q1", "One", "Q5", 40))).encode()
    t = fake_transport([ok(body)])
    cache = QueryCache(tmp_path, CachePolicy.READ_WRITE)
    q = build_fictional_candidates_query(30)
    d1 = execute_select(q, cache, "https://example.org/sparql", transport=t)
    assert (tmp_path / f"{query_key(q)}.json").read_bytes() == body
    assert len(t.calls) == 1
    d2 = execute_select(q, cache, "https://example.org/sparql", transport=t)
    assert d1 == d2 and len(t.calls) == 1
    manifest = (tmp_path / "manifest.tsv").read_text()
    key, preview = manifest.strip().split("\t")
    assert key == query_key(q) and preview == normalize_query(q)[:120]


def test_cache_hit_is_byte_identical(tmp_path):
    cache = QueryCache(tmp_path, CachePolicy.READ_WRITE)
    raw = b'{"head":{},   "results": {"bindings": []}}\n'
    cache.put("SELECT 1", raw)
    assert QueryCache(tmp_path, CachePolicy.READ_ONLY).get("SELECT 1") == raw


def test_readonly_miss_never_sends(tmp_path, fake_transport):
    t = fake_transport()
    with pytest.raises(CacheMiss) as info:
        execute_select("SELECT ?x {}", QueryCache(tmp_path, CachePolicy.READ_ONLY), "https://e.org/s", transport=t)
    assert info.value.key == query_key("SELECT ?x {}")
    assert t.calls == []


def test_bypass_neither_reads_nor_writes(tmp_path, fake_transport):
    rw = QueryCache(tmp_path, CachePolicy.READ_WRITE)
    rw.put("Q", json.dumps(doc()).encode())
    t = fake_transport([ok(doc(row("Q1", "One", "Q5", 40)))])
    d = execute_select("Q", QueryCache(tmp_path, CachePolicy.BYPASS), "https://e.org/s", transport=t)
    assert len(d["results"]["bindings"]) == 1
    assert json.loads(rw.get("Q")) == doc()


def test_cache_from_env_offline(monkeypatch, tmp_path):
    monkeypatch.setenv("ANTONOMAST_OFFLINE", "1")
    monkeypatch.setenv("ANTONOMAST_CACHE_DIR", str(tmp_path))
    c = QueryCache.from_env(policy=CachePolicy.READ_WRITE)
    assert c.policy is CachePolicy.READ_ONLY and c.root_dir == tmp_path


def test_cache_entries_and_clear(tmp_path):
    c = QueryCache(tmp_path, CachePolicy.READ_WRITE)
    c.put("SELECT a", b"{}")
    c.put("SELECT b", b"{}")
    keys = [k for k, _, _ in c.entries()]
    assert sorted(keys) == sorted([query_key("SELECT a"), query_key("SELECT b")])
    assert c.clear() == 2 and c.entries() == []
    assert not list(tmp_path.glob(".tmp-*"))


# -- transport behaviour -------------------------------------------------------


def test_request_headers(fake_transport):
    t = fake_transport([ok(doc())])
    fetch_raw("SELECT ?x {}", "https://e.org/sparql", transport=t)
    method, url, kw = t.calls[0]
    assert method == "GET" and kw["params"] == {"query": "SELECT ?x {}"}
    assert kw["headers"]["Accept"] == "application/sparql-results+json"
    ua = kw["headers"]["User-Agent"]
    assert ua.startswith("antonomast/") and "https://" in ua


def test_long_queries_are_posted(fake_transport):
    t = fake_transport([ok(doc())])
    fetch_raw("SELECT ?x {}" + " " * 3000, "https://e.org/sparql", transport=t)
    assert t.calls[0][0] == "POST" and "query" in t.calls[0][2]["data"]


def test_retry_with_backoff_and_retry_after(fake_transport):
    sleeps = []
    t = fake_transport([ok(b"busy", 429, {"Retry-After": "7"}), OSError("reset"), ok(doc())])
    body = fetch_raw("SELECT 1", "https://e.org/s", transport=t, sleep=sleeps.append)
    assert json.loads(body) == doc()
    assert sleeps == [7.0, 2.0]


def test_network_error_after_three_attempts(fake_transport):
    sleeps = []
    t = fake_transport([OSError("down")] * 3)
    with pytest.raises(NetworkError):
        fetch_raw("SELECT 1", "https://e.org/s", transport=t, sleep=sleeps.append)
    assert len(t.calls) == 3 and sleeps == [1.0, 2.0]


def test_endpoint_error_carries_body(fake_transport):
    t = fake_transport([ok(b"syntax error near X", 400)])
    with pytest.raises(EndpointError) as info:
        fetch_raw("SELECT 1", "https://e.org/s", transport=t, sleep=lambda s: None)
    assert info.value.status == 400 and "syntax error" in info.value.body


def test_persistent_5xx_is_endpoint_error(fake_transport):
    t = fake_transport([ok(b"x", 503)] * 3)
    with pytest.raises(EndpointError):
        fetch_raw("SELECT 1", "https://e.org/s", transport=t, sleep=lambda s: None)
    assert len(t.calls) == 3


def test_relative_endpoint_rejected(fake_transport):
    with pytest.raises(ValueError):
        fetch_raw("SELECT 1", "query.wikidata.org/sparql", transport=fake_transport())


@pytest.mark.parametrize("payload", [b"not json", b'{"head": {}}', b'{"results": {}}'])
def test_malformed_response_not_cached(tmp_path, fake_transport, payload):
    cache = QueryCache(tmp_path, CachePolicy.READ_WRITE)
    with pytest.raises(MalformedResponse):
        execute_select("SELECT 1", cache, "https://e.org/s", transport=fake_transport([ok(payload)]))
    assert cache.entries() == []


# -- candidate parsing ---------------------------------------------------------


def test_parse_empty():
    assert parse_candidates(doc(), CandidateKind.FICTIONAL, 30) == []


def test_parse_fictional_strict_bound():
    diag = Counter()
    out = parse_candidates(doc(row("Q1", "A", "Q9", 30), row("Q2", "B", "Q9", 31)), "fictional", 30, diagnostics=diag)
    assert [r.id for r in out] == ["Q2"] and diag["below_sitelinks"] == 1


def test_parse_human_inclusive_bound():
    out = parse_candidates(doc(row("Q1", "A", "Q9", 70), row("Q2", "B", "Q9", 69)), "human", 70)
    assert [r.id for r in out] == ["Q1"]


def test_parse_dedupes_item_occupation_pairs():
    out = parse_candidates(doc(row("Q1", "First", "Q9", 80), row("Q1", "Second", "Q9", 80), row("Q1", "A", "Q8", 80)),
                           "human", 70)
    assert [(r.label, r.occupation_id) for r in out] == [("First", "Q9"), ("A", "Q8")]


def test_parse_drops_missing_label_and_bad_optional_fields():
    bnode = row("Q3", "C", "Q9", 80)
    bnode["occupation"] = {"type": "bnode", "value": "t123"}
    diag = Counter()
    out = parse_candidates(
        doc(row("Q1", None, "Q9", 80), row("Q2", "", "Q9", 80), bnode, row("Q4", "D", "Q9", "many")),
        "human", 70, diagnostics=diag,
    )
    assert out == []
    assert diag == Counter(missing_label=2, bad_occupation=1, bad_sitelinks=1)


def test_parse_missing_item_aborts():
    bad = row("Q1", "A", "Q9", 80)
    del bad["item"]
    with pytest.raises(MalformedResponse):
        parse_candidates(doc(bad), "human", 70)


def test_parse_uses_occupation_label_when_projected():
    r = row("Q1", "A", "Q9", 80, occupationLabel={"type": "literal", "value": "painter"})
    assert parse_candidates(doc(r), "human", 70)[0].occupation_label == "painter"


def test_fixture_candidates_respect_bounds(fixture_cache):
    fict = fetch_candidates("fictional", fixture_cache, min_sitelinks=30)
    hum = fetch_candidates("human", fixture_cache, min_sitelinks=70)
    assert fict and hum
    assert all(r.sitelinks > 30 and r.kind is CandidateKind.FICTIONAL for r in fict)
    assert all(r.sitelinks >= 70 and r.kind is CandidateKind.HUMAN for r in hum)
    assert len({(r.id, r.occupation_id) for r in hum}) == len(hum)


def test_fixture_listing1_rows_have_fields(fixture_cache):
    d = execute_select(paginate(build_fictional_candidates_query(30), 5000, 0), fixture_cache)
    rows = d["results"]["bindings"]
    assert rows and all({"item", "itemLabel", "occupation", "sitelinks"} <= set(r) for r in rows)


def test_pagination_continues_until_short_page(tmp_path, fake_transport):
    full = doc(row("Q1", "A", "Q9", 80), row("Q2", "B", "Q9", 80))
    short = doc(row("Q3", "C", "Q9", 80))
    t = fake_transport([ok(full), ok(short)])
    cache = QueryCache(tmp_path, CachePolicy.READ_WRITE)
    out = fetch_candidates("human", cache, "https://e.org/s", page_size=2, transport=t)
    assert [r.id for r in out] == ["Q1", "Q2", "Q3"]
    sent = [c[2]["params"]["query"] for c in t.calls]
    assert sent[0].endswith("LIMIT 2 OFFSET 0\n") and sent[1].endswith("LIMIT 2 OFFSET 2\n")


def test_pagination_ceiling(tmp_path, fake_transport):
    page = doc(row("Q1", "A", "Q9", 80), row("Q2", "B", "Q9", 80))
    t = fake_transport([ok(page), ok(doc(row("Q3", "C", "Q9", 80)))])
    out = fetch_candidates("human", QueryCache(tmp_path), "https://e.org/s", page_size=2, max_rows=3, transport=t)
    assert len(t.calls) == 2 and t.calls[1][2]["params"]["query"].endswith("LIMIT 1 OFFSET 2\n")
    assert len(out) == 3


# -- target profiles -----------------------------------------------------------


def test_profile_turing_deceased(fixture_cache):
    p = fetch_target_profile("Alan Turing", fixture_cache)
    assert p.id == "Q7251" and p.has_date_of_death is True and p.gender is Gender.MALE
    assert p.occupations[0] == ("Q82594", "computer scientist")
    assert [o for o, _ in p.occupations] == ["Q82594", "Q170790", "Q1734662", "Q4964182"]


def test_profile_merkel_living(fixture_cache):
    p = fetch_target_profile("Angela Merkel", fixture_cache)
    assert p.has_date_of_death is False and p.gender is Gender.FEMALE
    assert p.occupations[0][1] == "politician"


def test_profile_id_passthrough_skips_resolution(tmp_path, fixture_cache):
    cache = QueryCache(tmp_path, CachePolicy.READ_ONLY)
    # only the profile document is available: a label query would miss
    cache.root_dir.mkdir(exist_ok=True)
    q = build_profile_query(EntityId("Q7251"))
    (tmp_path / f"{query_key(q)}.json").write_bytes(fixture_cache.get(q))
    assert fetch_target_profile("Q7251", cache).label == "Alan Turing"
    with pytest.raises(CacheMiss):
        fetch_target_profile("Alan Turing", cache)


def test_profile_without_occupation(fixture_cache):
    with pytest.raises(NoOccupation):
        fetch_target_profile("Nobody Inparticular", fixture_cache)
    assert fetch_target_profile("Nobody Inparticular", fixture_cache, require_occupation=False).occupations == ()


def _label_doc(*pairs):
    return {"head": {}, "results": {"bindings": [
        {"item": {"type": "uri", "value": E + q}, "sitelinks": {"type": "literal", "value": str(n)}} for q, n in pairs
    ]}}


def test_label_resolution_prefers_sitelinks(tmp_path, fake_transport):
    profile = {"head": {}, "results": {"bindings": [{
        "item": {"type": "uri", "value": E + "Q2"}, "itemLabel": {"type": "literal", "value": "X"},
        "sitelinks": {"type": "literal", "value": "90"},
        "occupation": {"type": "uri", "value": E + "Q9"}, "occupationLabel": {"type": "literal", "value": "nine"},
        "dead": {"type": "literal", "value": "false"}}]}}
    t = fake_transport([ok(_label_doc(("Q1", 10), ("Q2", 90), ("Q1", 12))), ok(profile)])
    p = fetch_target_profile("X", QueryCache(tmp_path), "https://e.org/s", transport=t)
    assert p.id == "Q2" and p.gender is Gender.UNKNOWN and p.occupations == (("Q9", "nine"),)


def test_label_resolution_tie_is_ambiguous(tmp_path, fake_transport):
    t = fake_transport([ok(_label_doc(("Q3", 50), ("Q1", 50), ("Q2", 5)))])
    with pytest.raises(AmbiguousLabel) as info:
        fetch_target_profile("X", QueryCache(tmp_path), "https://e.org/s", transport=t)
    assert info.value.ids == ["Q1", "Q3"]


def test_label_not_found(tmp_path, fake_transport):
    with pytest.raises(EntityNotFound):
        fetch_target_profile("Nope", QueryCache(tmp_path), "https://e.org/s", transport=fake_transport([ok(_label_doc())]))


def test_fixture_files_present():
    assert (FIXTURES / "cache" / "manifest.tsv").exists()
