"""LLM baseline: the fixed antonomasia prompt, chat-completion transports, reply parsing."""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Protocol

from .errors import FixtureMiss, TransportError
from .http import USER_AGENT, RequestsTransport, Transport
from .wikidata.models import Gender, TargetProfile

# "Antonomiasias" is the spelling of the published prompt and is kept as is.
PROMPT_TEMPLATE = (
    "Provide 10 Vossian Antonomiasias for {name}, where {pronoun} is equated with another person. "
    'Each of the phrases should have the structure "{name} is the [person name] of [profession]", '
    "where [profession] must not characterize [person name]. "
    "Provide a very short justification for each example."
)

PRONOUNS = {Gender.FEMALE: "she", Gender.MALE: "he", Gender.UNKNOWN: "he or she"}

API_KEY_ENV = "ANTONOMAST_LLM_KEY"


@dataclass(frozen=True)
class ChatPrompt:
    text: str
    target: TargetProfile

    @property
    def key(self) -> str:
        return prompt_key(self.text)


def prompt_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_va_prompt(profile: TargetProfile) -> ChatPrompt:
    if not profile.label:
        raise ValueError("target label must be non-empty")
    text = PROMPT_TEMPLATE.format(name=profile.label, pronoun=PRONOUNS[profile.gender])
    return ChatPrompt(text, profile)


# -- transports ----------------------------------------------------------------


class LlmTransport(Protocol):
    def complete(self, prompt: ChatPrompt) -> str: ...


class RecordedTransport:
    """Replays completions stored as ``<fixtures>/<sha256(prompt)>.txt``."""

    def __init__(self, fixture_dir: str | os.PathLike):
        self.fixture_dir = Path(fixture_dir)

    def path_for(self, prompt: ChatPrompt) -> Path:
        return self.fixture_dir / f"{prompt.key}.txt"

    def complete(self, prompt: ChatPrompt) -> str:
        path = self.path_for(prompt)
        try:
            return path.read_bytes().decode("utf-8")
        except FileNotFoundError:
            raise FixtureMiss(prompt.key) from None


class LiveTransport:
    """Single-message chat-completion POST to an OpenAI-compatible endpoint.

    No temperature or retry policy is applied; the server defaults are used.
    With ``record_dir`` set, request/response bodies are logged there and the
    completion is stored in the fixture layout so it can be replayed later.
    """

    def __init__(
        self,
        endpoint: str,
        model: str = "gpt-3.5-turbo",
        *,
        key_env: str = API_KEY_ENV,
        record_dir: str | os.PathLike | None = None,
        http: Transport | None = None,
        timeout: float = 120.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.key_env = key_env
        self.record_dir = Path(record_dir) if record_dir else None
        self._http = http
        self.timeout = timeout

    def complete(self, prompt: ChatPrompt) -> str:
        key = os.environ.get(self.key_env)
        if not key:
            raise TransportError(f"no API key configured (set {self.key_env})")
        body = {"model": self.model, "messages": [{"role": "user", "content": prompt.text}]}
        http = self._http or RequestsTransport()
        headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json", "User-Agent": USER_AGENT}
        try:
            resp = http.send("POST", self.endpoint, json=body, headers=headers, timeout=self.timeout)
        except OSError as exc:
            raise TransportError(f"chat completion request failed: {exc}") from exc
        if not resp.ok:
            raise TransportError(f"chat completion endpoint returned HTTP {resp.status}: {resp.text()[:200]}")
        try:
            text = json.loads(resp.body)["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected chat completion response: {exc}") from exc
        if self.record_dir is not None:
            self.record_dir.mkdir(parents=True, exist_ok=True)
            log = {"request": body, "response": json.loads(resp.body), "temperature": "server default"}
            (self.record_dir / f"{prompt.key}.json").write_text(json.dumps(log, indent=2), encoding="utf-8")
            (self.record_dir / f"{prompt.key}.txt").write_bytes(text.encode("utf-8"))
        return text


def complete(prompt: ChatPrompt, transport: LlmTransport) -> str:
    return transport.complete(prompt)


# -- parsing -------------------------------------------------------------------


class ParsedVa(NamedTuple):
    source_label: str
    modifier_label: str
    justification: str | None
    verb: str = "is"


_NUMBERING = re.compile(r"^\s*(?:\(?\d+[.)]|[-*•])\s*")
_QUOTES = "\"'“”‘’"
# first separator after the modifier starts the justification
_SEPARATOR = re.compile(r"\s*(?:—|–|:|\.(?:\s|$)|\.$|[\"”]|\s-\s)\s*")


def parse_va_lines(completion: str, target_label: str, *, counts: dict | None = None) -> list[ParsedVa]:
    """Pull ``<target> is/was the <X> of <Y>`` statements out of an LLM reply."""
    if not target_label:
        return []
    pattern = re.compile(
        rf"{re.escape(target_label)}\s+(is|was)\s+the\s+(.+?)\s+of\s+(.+)$", re.IGNORECASE
    )
    out: list[ParsedVa] = []
    skipped = 0
    for raw in completion.splitlines():
        line = _NUMBERING.sub("", raw.replace("**", "")).strip().lstrip(_QUOTES)
        if not line:
            continue
        m = pattern.search(line)
        if not m:
            skipped += 1
            continue
        verb, source, rest = m.group(1).lower(), m.group(2).strip(_QUOTES + " "), m.group(3)
        sep = _SEPARATOR.search(rest)
        if sep:
            modifier, justification = rest[: sep.start()], rest[sep.end():]
        else:
            modifier, justification = rest, ""
        modifier = modifier.strip(_QUOTES + " ")
        justification = justification.strip(_QUOTES + " -—–:") or None
        if not source or not modifier:
            skipped += 1
            continue
        out.append(ParsedVa(source, modifier, justification, verb))
    if counts is not None:
        counts["skipped"] = counts.get("skipped", 0) + skipped
    return out


def render_parsed(target_label: str, parsed: ParsedVa) -> str:
    return f"{target_label} {parsed.verb} the {parsed.source_label} of {parsed.modifier_label}"
