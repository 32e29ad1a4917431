"""Command-line front end.

Exit codes: 0 ok, 1 other error, 2 endpoint/transport failure, 3 cache or
fixture miss in offline mode, 4 no viable candidate, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from functools import lru_cache
from pathlib import Path

from . import __version__
from .baseline import LiveTransport, RecordedTransport, build_va_prompt, parse_va_lines, render_parsed
from .embeddings import Backend, load_text_embeddings
from .errors import (
    AntonomastError,
    CacheMiss,
    EndpointError,
    FixtureMiss,
    NetworkError,
    NoViableCandidate,
    TransportError,
)
from .pipeline import Method, RankingParams, SourceConfig, generate
from .report import Cell, all_failed, compare_targets, comparison_tsv, format_run, read_targets
from .vectors import TranslationalMode
from .wikidata import CachePolicy, QueryCache, fetch_candidates, fetch_target_profile
from .wikidata.cache import DEFAULT_CACHE_DIR
from .wikidata.client import DEFAULT_ENDPOINT, MAX_ROWS, PAGE_SIZE

logger = logging.getLogger("antonomast")

EXIT_OK, EXIT_ERROR, EXIT_ENDPOINT, EXIT_CACHE_MISS, EXIT_NO_CANDIDATE, EXIT_USAGE = 0, 1, 2, 3, 4, 64

DEFAULTS = {
    "endpoint": DEFAULT_ENDPOINT,
    "cache_dir": str(DEFAULT_CACHE_DIR),
    "offline": False,
    "embeddings": None,
    "backend": "kg",
    "kg_embeddings": None,
    "word_embeddings": None,
    "method": "projection",
    "k": 10,
    "extremal_rerank": True,
    "translational_mode": "residual",
    "strict_domain": False,
    "kinds": "fictional,human",
    "format": "text",
    "page_size": PAGE_SIZE,
    "max_rows": MAX_ROWS,
    "fixtures": None,
    "llm_endpoint": None,
    "llm_model": "gpt-3.5-turbo",
}
ENV = {
    "endpoint": "ANTONOMAST_ENDPOINT",
    "cache_dir": "ANTONOMAST_CACHE_DIR",
    "offline": "ANTONOMAST_OFFLINE",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _truthy(value: str) -> bool:
    return value.strip().lower() in {"1", "true", "yes", "on"}


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags > environment > ``--config`` JSON file > built-in defaults."""
    file_cfg: dict = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
    cfg = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
        elif key in ENV and os.environ.get(ENV[key]):
            raw = os.environ[ENV[key]]
            cfg[key] = _truthy(raw) if key == "offline" else raw
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        else:
            cfg[key] = default
    return cfg


def make_cache(cfg: dict) -> QueryCache:
    policy = CachePolicy.READ_ONLY if cfg["offline"] else CachePolicy.READ_WRITE
    return QueryCache(Path(cfg["cache_dir"]), policy)


@lru_cache(maxsize=4)
def _load_index(path: str, backend: str):
    return load_text_embeddings(path, backend)


def _index_for(cfg: dict, backend: str | None = None):
    backend = backend or cfg["backend"]
    path = None
    if backend == "kg":
        path = cfg["kg_embeddings"]
    elif backend == "word":
        path = cfg["word_embeddings"]
    if path is None and backend == cfg["backend"]:
        path = cfg["embeddings"]
    if path is None:
        raise UsageError(f"no embeddings file configured for backend {backend!r} (use --embeddings)")
    return _load_index(str(path), backend)


def _params(cfg: dict, method: str | None = None) -> RankingParams:
    return RankingParams(
        method=Method(method or cfg["method"]),
        k=int(cfg["k"]),
        extremal_rerank=bool(cfg["extremal_rerank"]),
        translational_mode=TranslationalMode(cfg["translational_mode"]),
        strict_domain=bool(cfg["strict_domain"]),
    )


def _source(cfg: dict, cache: QueryCache) -> SourceConfig:
    kinds = tuple(k.strip() for k in str(cfg["kinds"]).split(",") if k.strip())
    bad = [k for k in kinds if k not in ("fictional", "human")]
    if bad or not kinds:
        raise UsageError(f"--kinds must list fictional and/or human, got {cfg['kinds']!r}")
    return SourceConfig(
        cache=cache,
        endpoint=cfg["endpoint"],
        kinds=kinds,
        page_size=int(cfg["page_size"]),
        max_rows=int(cfg["max_rows"]),
    )


def _llm_transport(cfg: dict, record: str | None = None):
    if cfg["fixtures"]:
        return RecordedTransport(cfg["fixtures"])
    if cfg["offline"]:
        raise TransportError("offline mode needs --fixtures for the LLM baseline")
    if not cfg["llm_endpoint"]:
        raise UsageError("the LLM baseline needs --fixtures or --llm-endpoint")
    return LiveTransport(cfg["llm_endpoint"], cfg["llm_model"], record_dir=record)


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------------


def cmd_fetch_candidates(args, cfg) -> int:
    cache = make_cache(cfg)
    diag: Counter = Counter()
    records = fetch_candidates(
        args.kind,
        cache,
        cfg["endpoint"],
        min_sitelinks=args.min_sitelinks,
        page_size=int(cfg["page_size"]),
        max_rows=int(cfg["max_rows"]),
        diagnostics=diag,
    )
    lines = "".join(json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for r in records)
    _write(lines, args.out)
    dropped = sum(v for k, v in diag.items() if k != "duplicate")
    print(
        f"{len(records)} {args.kind} candidates written; {dropped} rows dropped, {diag['duplicate']} duplicates",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_generate(args, cfg) -> int:
    index = _index_for(cfg)
    run = generate(args.target, _params(cfg), index, _source(cfg, make_cache(cfg)))
    sys.stdout.write(format_run(run, cfg["format"]))
    if args.plot:
        from .plotting import plot_ranking

        plot_ranking(run, args.plot)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _parse_method_token(token: str) -> tuple[str, str | None]:
    name, _, backend = token.partition(":")
    if name == "llm":
        if backend:
            raise UsageError(f"bad method {token!r}: llm takes no backend")
        return name, None
    if name not in (m.value for m in Method):
        raise UsageError(f"unknown method {token!r}")
    if backend and backend not in (b.value for b in Backend):
        raise UsageError(f"unknown backend in {token!r}")
    return name, backend or None


def cmd_compare(args, cfg) -> int:
    methods = list(args.methods)
    parsed = {m: _parse_method_token(m) for m in methods}
    targets = read_targets(args.targets)
    cache = make_cache(cfg)
    source = _source(cfg, cache)
    params = _params(cfg)
    profiles: dict[str, object] = {}

    def profile(target):
        if target not in profiles:
            profiles[target] = fetch_target_profile(target, cache, cfg["endpoint"])
        return profiles[target]

    def runner(target: str, token: str) -> Cell:
        name, backend = parsed[token]
        if name == "llm":
            prof = profile(target)
            text = _llm_transport(cfg).complete(build_va_prompt(prof))
            found = parse_va_lines(text, prof.label)
            if not found:
                return Cell("ERROR:NoParsableLine", failed=True)
            return Cell(render_parsed(prof.label, found[0]))
        profile(target)
        p = RankingParams(
            method=Method(name),
            k=params.k,
            extremal_rerank=params.extremal_rerank,
            translational_mode=params.translational_mode,
            strict_domain=params.strict_domain,
        )
        run = generate(target, p, _index_for(cfg, backend), source)
        top = run.results[0]
        return Cell(top.sentence, similarity=top.similarity)

    rows = compare_targets(targets, methods, runner)
    _write(comparison_tsv(targets, methods, rows), args.out)
    if args.plot:
        from .plotting import plot_comparison

        plot_comparison(targets, methods, rows, args.plot)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return EXIT_ERROR if all_failed(rows) else EXIT_OK


def cmd_baseline(args, cfg) -> int:
    profile = fetch_target_profile(args.target, make_cache(cfg), cfg["endpoint"], require_occupation=False)
    prompt = build_va_prompt(profile)
    if args.print_prompt:
        print(prompt.text)
        return EXIT_OK
    text = _llm_transport(cfg, args.record).complete(prompt)
    counts: dict = {}
    found = parse_va_lines(text, profile.label, counts=counts)
    if cfg["format"] == "json":
        doc = {
            "prompt": prompt.text,
            "prompt_key": prompt.key,
            "results": [p._asdict() | {"sentence": render_parsed(profile.label, p)} for p in found],
            "skipped_lines": counts.get("skipped", 0),
        }
        sys.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    else:
        for p in found:
            print(render_parsed(profile.label, p))
    print(f"{len(found)} antonomasias parsed, {counts.get('skipped', 0)} lines skipped", file=sys.stderr)
    return EXIT_OK


def cmd_cache(args, cfg) -> int:
    cache = QueryCache(Path(cfg["cache_dir"]), CachePolicy.READ_ONLY)
    if args.action == "ls":
        for key, size, preview in cache.entries():
            print(f"{key}\t{size}\t{preview}")
        return EXIT_OK
    n = cache.clear()
    print(f"removed {n} cached responses", file=sys.stderr)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--endpoint", help="SPARQL endpoint URL")
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--offline", action="store_const", const=True, default=None,
                        help="serve everything from the cache; never touch the network")
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--embeddings", help="embedding file for --backend")
    common.add_argument("--backend", choices=[b.value for b in Backend])
    common.add_argument("--kg-embeddings", dest="kg_embeddings")
    common.add_argument("--word-embeddings", dest="word_embeddings")
    common.add_argument("--format", choices=["text", "json", "tsv"])
    common.add_argument("--page-size", dest="page_size", type=int)
    common.add_argument("--max-rows", dest="max_rows", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    ranking = argparse.ArgumentParser(add_help=False)
    ranking.add_argument("--k", type=int)
    rr = ranking.add_mutually_exclusive_group()
    rr.add_argument("--rerank", dest="extremal_rerank", action="store_const", const=True, default=None)
    rr.add_argument("--no-rerank", dest="extremal_rerank", action="store_const", const=False)
    ranking.add_argument("--translational-mode", dest="translational_mode",
                         choices=[m.value for m in TranslationalMode])
    ranking.add_argument("--strict-domain", dest="strict_domain", action="store_const", const=True, default=None)
    ranking.add_argument("--kinds", help="comma-separated candidate kinds (fictional,human)")

    llm = argparse.ArgumentParser(add_help=False)
    llm.add_argument("--fixtures", help="directory of recorded completions")
    llm.add_argument("--llm-endpoint", dest="llm_endpoint")
    llm.add_argument("--model", dest="llm_model")

    parser = _Parser(prog="antonomast", description="Generate Vossian Antonomasias.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fetch-candidates", parents=[common], help="download and parse candidate sources")
    p.add_argument("--kind", required=True, choices=["fictional", "human"])
    p.add_argument("--min-sitelinks", dest="min_sitelinks", type=int)
    p.add_argument("--out", help="JSON-lines output file (default stdout)")
    p.set_defaults(func=cmd_fetch_candidates)

    p = sub.add_parser("generate", parents=[common, ranking], help="generate antonomasias for one target")
    p.add_argument("--target", required=True, help="Wikidata id or English label")
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--plot", help="also write a ranking figure (png/pdf/svg)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compare", parents=[common, ranking, llm], help="top-1 output of several methods per target")
    p.add_argument("--targets", required=True, help="file with one target per line")
    p.add_argument("--methods", nargs="+", default=["projection", "translational"],
                   help="projection, translational (optionally :kg or :word) and llm")
    p.add_argument("--out", help="TSV output file (default stdout)")
    p.add_argument("--plot", help="also write a comparison figure")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("baseline", parents=[common, llm], help="run the LLM baseline prompt")
    p.add_argument("--target", required=True)
    p.add_argument("--record", help="log live requests and store replayable fixtures here")
    p.add_argument("--print-prompt", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("cache", parents=[common], help="inspect or clear the response cache")
    p.add_argument("action", choices=["ls", "clear"])
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve(args)
        if cfg["format"] not in ("text", "json", "tsv"):
            raise UsageError(f"unknown format {cfg['format']!r}")
        try:
            Method(cfg["method"])
        except ValueError:
            raise UsageError(f"unknown method {cfg['method']!r}") from None
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"antonomast: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CacheMiss, FixtureMiss) as exc:
        print(f"antonomast: offline cache miss: {exc}", file=sys.stderr)
        return EXIT_CACHE_MISS
    except (EndpointError, NetworkError, TransportError) as exc:
        print(f"antonomast: endpoint failure: {exc}", file=sys.stderr)
        return EXIT_ENDPOINT
    except NoViableCandidate as exc:
        print(f"antonomast: {exc}", file=sys.stderr)
        return EXIT_NO_CANDIDATE
    except (AntonomastError, ValueError, OSError) as exc:
        print(f"antonomast: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
