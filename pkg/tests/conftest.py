import socket
from pathlib import Path

import hypothesis
import pytest
import yaml

from trendlex.lexicon import load_lexicon_file, starter_lexicon
from trendlex.records import record_from_mapping

hypothesis.settings.register_profile("ci", deadline=None, print_blob=True)
hypothesis.settings.load_profile("ci")

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


class LiveNetworkCall(AssertionError):
    pass


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Any attempt to open a real connection fails the test."""
    calls = []

    def refuse(self, address, *a, **kw):
        calls.append(address)
        raise LiveNetworkCall(f"live network call to {address!r}")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket.socket, "connect_ex", refuse)
    monkeypatch.setattr(socket, "create_connection", lambda address, *a, **kw: refuse(None, address))
    return calls


@pytest.fixture(scope="session")
def starter():
    return starter_lexicon()


@pytest.fixture(scope="session")
def hand_lexicon():
    return load_lexicon_file(FIXTURES / "handlabeled" / "lexicon.yaml")


@pytest.fixture(scope="session")
def hand_rows():
    return yaml.safe_load((FIXTURES / "handlabeled" / "abstracts.yaml").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def hand_records(hand_rows):
    keys = ("id", "venue", "year", "title", "abstract")
    return [record_from_mapping({k: r[k] for k in keys}) for r in hand_rows]


class FixtureTransport:
    """Serves recorded pages by URL path and counts requests."""

    routes = {
        "/cvpr/2025/index.html": "index-1.html",
        "/cvpr/2025/index-2.html": "index-2.html",
        **{f"/papers/p10{i}.html": f"p10{i}.html" for i in range(1, 6)},
    }

    def __init__(self):
        self.requests = []

    def __call__(self, url):
        from urllib.parse import urlparse

        self.requests.append(url)
        name = self.routes.get(urlparse(url).path)
        if name is None:
            raise OSError(f"404 {url}")
        return (FIXTURES / "harvest" / name).read_text(encoding="utf-8")


@pytest.fixture
def transport():
    return FixtureTransport()


# -- acceptance verdicts ----------------------------------------------------------

_VERDICTS: dict[int, list[bool]] = {}
_TITLES: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n, title = mark.args
        _TITLES[n] = title
        _VERDICTS.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        verdict = "PASS" if all(_VERDICTS[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {_TITLES[n]}")
