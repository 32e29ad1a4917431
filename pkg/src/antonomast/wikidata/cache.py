"""On-disk cache of raw SPARQL responses, keyed by normalized query text."""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..errors import CacheMiss

DEFAULT_CACHE_DIR = Path.home() / ".cache" / "antonomast"
MANIFEST = "manifest.tsv"
_WS = re.compile(r"\s+")


class CachePolicy(str, Enum):
    READ_WRITE = "readwrite"
    READ_ONLY = "readonly"
    BYPASS = "bypass"


def normalize_query(query: str) -> str:
    return _WS.sub(" ", query).strip()


def query_key(query: str) -> str:
    return hashlib.sha256(normalize_query(query).encode("utf-8")).hexdigest()


def offline_from_env() -> bool:
    return os.environ.get("ANTONOMAST_OFFLINE", "").strip().lower() in {"1", "true", "yes"}


@dataclass
class QueryCache:
    """Response cache rooted at ``root_dir``.

    ``READ_ONLY`` never goes to the network: a miss raises :class:`CacheMiss`.
    ``BYPASS`` neither reads nor writes. Keys handed out are collected in
    ``used_keys`` for result provenance.
    """

    root_dir: Path
    policy: CachePolicy = CachePolicy.READ_WRITE
    used_keys: list[str] = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        self.root_dir = Path(self.root_dir)
        self.policy = CachePolicy(self.policy)

    @classmethod
    def from_env(cls, root_dir: str | os.PathLike | None = None, policy: CachePolicy | None = None):
        root = root_dir or os.environ.get("ANTONOMAST_CACHE_DIR") or DEFAULT_CACHE_DIR
        if offline_from_env():
            policy = CachePolicy.READ_ONLY
        return cls(Path(root), policy or CachePolicy.READ_WRITE)

    @property
    def offline(self) -> bool:
        return self.policy is CachePolicy.READ_ONLY

    def path_for(self, key: str) -> Path:
        return self.root_dir / f"{key}.json"

    def get(self, query: str) -> bytes | None:
        """Stored response body for ``query``, or None. Raises CacheMiss when read-only."""
        key = query_key(query)
        if self.policy is CachePolicy.BYPASS:
            return None
        path = self.path_for(key)
        try:
            body = path.read_bytes()
        except FileNotFoundError:
            if self.policy is CachePolicy.READ_ONLY:
                raise CacheMiss(key, query) from None
            return None
        self._note(key)
        return body

    def put(self, query: str, body: bytes) -> Path | None:
        if self.policy is not CachePolicy.READ_WRITE:
            return None
        key = query_key(query)
        self.root_dir.mkdir(parents=True, exist_ok=True)
        path = self.path_for(key)
        fd, tmp = tempfile.mkstemp(dir=self.root_dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(body)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        preview = normalize_query(query)[:120].replace("\t", " ")
        with self._lock:
            with open(self.root_dir / MANIFEST, "a", encoding="utf-8") as fh:
                fh.write(f"{key}\t{preview}\n")
        self._note(key)
        return path

    def _note(self, key: str) -> None:
        if key not in self.used_keys:
            self.used_keys.append(key)

    def manifest(self) -> dict[str, str]:
        out: dict[str, str] = {}
        path = self.root_dir / MANIFEST
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                key, _, preview = line.partition("\t")
                out.setdefault(key, preview)
        return out

    def entries(self) -> list[tuple[str, int, str]]:
        """(key, size in bytes, query preview) for each stored response, sorted by key."""
        if not self.root_dir.is_dir():
            return []
        previews = self.manifest()
        rows = []
        for p in sorted(self.root_dir.glob("*.json")):
            if p.name.startswith(".tmp-"):
                continue
            rows.append((p.stem, p.stat().st_size, previews.get(p.stem, "")))
        return rows

    def clear(self) -> int:
        n = 0
        if not self.root_dir.is_dir():
            return 0
        for p in self.root_dir.glob("*.json"):
            p.unlink()
            n += 1
        (self.root_dir / MANIFEST).unlink(missing_ok=True)
        return n
