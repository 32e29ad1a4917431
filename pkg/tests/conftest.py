import os
import socket
from pathlib import Path

import pytest

# The whole suite runs offline; any socket use is recorded and refused.
os.environ["ANTONOMAST_OFFLINE"] = "1"
os.environ.pop("ANTONOMAST_ENDPOINT", None)

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

NETWORK_ATTEMPTS: list[tuple] = []


def _refuse(name):
    def blocked(*args, **kwargs):
        NETWORK_ATTEMPTS.append((name, args[1:] if name == "connect" else args))
        raise OSError(f"network access blocked in tests ({name})")

    return blocked


@pytest.fixture(scope="session", autouse=True)
def no_network():
    mp = pytest.MonkeyPatch()
    mp.setattr(socket.socket, "connect", _refuse("connect"))
    mp.setattr(socket.socket, "connect_ex", _refuse("connect_ex"))
    mp.setattr(socket, "create_connection", _refuse("create_connection"))
    mp.setattr(socket, "getaddrinfo", _refuse("getaddrinfo"))
    yield NETWORK_ATTEMPTS
    mp.undo()
    assert NETWORK_ATTEMPTS == [], f"tests attempted network access: {NETWORK_ATTEMPTS}"


class FakeTransport:
    """Scripted stand-in for the HTTP transport; records every request."""

    def __init__(self, responses=()):
        self.responses = list(responses)
        self.calls = []

    def send(self, method, url, **kw):
        self.calls.append((method, url, kw))
        if not self.responses:
            raise AssertionError("unexpected request")
        r = self.responses.pop(0)
        if isinstance(r, BaseException):
            raise r
        return r


@pytest.fixture
def fake_transport():
    return FakeTransport


@pytest.fixture
def fixture_cache():
    from antonomast.wikidata import CachePolicy, QueryCache

    return QueryCache(FIXTURES / "cache", CachePolicy.READ_ONLY)


@pytest.fixture(scope="session")
def kg_index():
    from antonomast.embeddings import load_text_embeddings

    return load_text_embeddings(FIXTURES / "kg_8d.txt", "kg")


@pytest.fixture(scope="session")
def word_index():
    from antonomast.embeddings import load_text_embeddings

    return load_text_embeddings(FIXTURES / "word_8d.txt", "word")


SUITE_LIMIT_SECONDS = 60.0


def pytest_sessionstart(session):
    import time

    session.config._antonomast_t0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time

    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    elapsed = time.perf_counter() - config._antonomast_t0
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, ok, seconds, note in RESULTS:
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  [{seconds:.2f}s]{'  ' + note if note else ''}")
    verdict = "PASS" if elapsed < SUITE_LIMIT_SECONDS else "FAIL"
    tr.write_line(f"{verdict}  C8 suite runtime {elapsed:.1f}s (limit {SUITE_LIMIT_SECONDS:.0f}s)")


def pytest_sessionfinish(session, exitstatus):
    import time

    t0 = getattr(session.config, "_antonomast_t0", None)
    if t0 is not None and time.perf_counter() - t0 >= SUITE_LIMIT_SECONDS and exitstatus == 0:
        session.exitstatus = 1
