"""Minimal HTTP transport layer.

Everything that talks to the network goes through an object with a ``send``
method, so tests can swap in a recording fake and prove that offline runs
never touch a socket.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Protocol

from . import __version__

USER_AGENT = (
    f"antonomast/{__version__} "
    "(https://github.com/antonomast/antonomast; vossian-antonomasia generator)"
)


@dataclass
class Response:
    status: int
    body: bytes
    headers: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return 200 <= self.status < 300

    def text(self) -> str:
        return self.body.decode("utf-8", errors="replace")


class Transport(Protocol):
    def send(
        self,
        method: str,
        url: str,
        *,
        params: dict | None = None,
        data: dict | None = None,
        json: dict | None = None,
        headers: dict | None = None,
        timeout: float = 60.0,
    ) -> Response: ...


class RequestsTransport:
    """``requests``-backed transport with a cap on concurrent requests."""

    def __init__(self, max_in_flight: int = 1):
        if max_in_flight not in (1, 2):
            raise ValueError("max_in_flight must be 1 or 2")
        import requests

        self._requests = requests
        self._session = requests.Session()
        self._gate = threading.Semaphore(max_in_flight)

    def send(self, method, url, *, params=None, data=None, json=None, headers=None, timeout=60.0):
        with self._gate:
            r = self._session.request(
                method, url, params=params, data=data, json=json, headers=headers, timeout=timeout
            )
        return Response(r.status_code, r.content, dict(r.headers))
