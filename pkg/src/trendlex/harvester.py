"""Fetch accepted-paper listings over HTTP and emit record-store JSONL.

Two page shapes are understood: an index page whose paper links carry a
configured class (with an optional ``rel="next"`` pagination link), and a detail
page whose title and abstract live in elements with configured ids. The fetch
function is injected, so tests run against recorded fixtures.
"""
from __future__ import annotations

import json
import logging
import threading
import time
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Iterable
from urllib.parse import urljoin, urlparse

from .records import PaperRecord, record_from_mapping

log = logging.getLogger(__name__)

Transport = Callable[[str], str]

USER_AGENT = "trendlex-harvester/0.1 (+polite; research metadata)"


class HarvestError(Exception):
    pass


class HarvestNetworkError(HarvestError):
    def __init__(self, url: str, attempts: int, cause: BaseException | None = None):
        super().__init__(f"fetching {url} failed after {attempts} attempt(s): {cause}")
        self.url = url
        self.attempts = attempts
        self.cause = cause


@dataclass(frozen=True)
class ListingShape:
    link_class: str = "paper-link"
    next_rel: str = "next"
    title_id: str = "title"
    abstract_id: str = "abstract"


@dataclass
class HarvestJob:
    venue: str
    year: int
    endpoint: str
    checkpoint: set[str] = field(default_factory=set)
    rate_limit: float = 1.0
    max_attempts: int = 3
    backoff: float = 1.0
    workers: int = 4
    shape: ListingShape = field(default_factory=ListingShape)
    checkpoint_path: Path | None = None

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def start_url(self) -> str:
        return self.endpoint.format(venue=self.venue, year=self.year)


@dataclass
class ItemDiagnostic:
    url: str
    message: str


@dataclass
class HarvestReport:
    fetched: int = 0
    skipped: int = 0
    failed: int = 0
    pages: int = 0
    diagnostics: list[ItemDiagnostic] = field(default_factory=list)


class RateLimiter:
    """Spaces successive acquisitions at least 1/rate seconds apart."""

    def __init__(self, rate: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.interval = 1.0 / rate
        self.clock = clock
        self.sleep = sleep
        self._next = None
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            if self._next is not None and now < self._next:
                self.sleep(self._next - now)
                now = self._next
            self._next = now + self.interval


class _PageParser(HTMLParser):
    def __init__(self, shape: ListingShape):
        super().__init__(convert_charrefs=True)
        self.shape = shape
        self.links: list[str] = []
        self.next_url: str | None = None
        self.fields: dict[str, list[str]] = {}
        self._capture: list[tuple[str, str]] = []  # (field, tag) stack

    def handle_starttag(self, tag, attrs):
        a = {k: (v or "") for k, v in attrs}
        if tag == "a" and "href" in a:
            if self.shape.link_class in a.get("class", "").split():
                self.links.append(a["href"])
            if self.shape.next_rel in a.get("rel", "").split():
                self.next_url = a["href"]
        ident = a.get("id")
        if ident in (self.shape.title_id, self.shape.abstract_id):
            self._capture.append((ident, tag))
            self.fields.setdefault(ident, [])
        elif self._capture and tag == self._capture[-1][1]:
            self._capture.append((self._capture[-1][0], tag))

    def handle_endtag(self, tag):
        if self._capture and self._capture[-1][1] == tag:
            self._capture.pop()

    def handle_data(self, data):
        if self._capture:
            self.fields[self._capture[-1][0]].append(data)

    def text(self, ident: str) -> str | None:
        parts = self.fields.get(ident)
        return None if parts is None else " ".join("".join(parts).split())


def parse_page(html: str, shape: ListingShape) -> _PageParser:
    p = _PageParser(shape)
    p.feed(html)
    p.close()
    return p


def paper_id(venue: str, year: int, url: str) -> str:
    path = urlparse(url).path.rstrip("/")
    stem = path.rsplit("/", 1)[-1]
    stem = stem.rsplit(".", 1)[0] if "." in stem else stem
    return f"{venue}-{year}-{stem}"


def urllib_transport(url: str, timeout: float = 30.0) -> str:
    # urllib picks up http_proxy/https_proxy from the environment by default.
    req = urllib.request.Request(url, headers={"User-Agent": USER_AGENT})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        charset = resp.headers.get_content_charset() or "utf-8"
        return resp.read().decode(charset, errors="replace")


class Harvester:
    def __init__(self, job: HarvestJob, transport: Transport = urllib_transport,
                 sleep: Callable[[float], None] = time.sleep, clock: Callable[[], float] = time.monotonic):
        self.job = job
        self.transport = transport
        self.sleep = sleep
        self.limiter = RateLimiter(job.rate_limit, clock, sleep)
        self._cp_lock = threading.Lock()
        # A private copy: the caller's checkpoint set is left as given.
        self.done = set(job.checkpoint)

    def fetch(self, url: str) -> str:
        delay = self.job.backoff
        last: BaseException | None = None
        for attempt in range(1, self.job.max_attempts + 1):
            self.limiter.acquire()
            try:
                return self.transport(url)
            except Exception as exc:  # transport errors are opaque by design
                last = exc
                log.warning("fetch %s failed (attempt %d/%d): %s", url, attempt, self.job.max_attempts, exc)
                if attempt < self.job.max_attempts:
                    self.sleep(delay)
                    delay *= 2
        raise HarvestNetworkError(url, self.job.max_attempts, last)

    def discover(self, report: HarvestReport) -> list[str]:
        """Walk the paginated index; returns detail URLs in discovery order."""
        url: str | None = self.job.start_url
        seen_pages: set[str] = set()
        links: list[str] = []
        seen_links: set[str] = set()
        while url and url not in seen_pages:
            seen_pages.add(url)
            page = parse_page(self.fetch(url), self.job.shape)
            report.pages += 1
            for href in page.links:
                full = urljoin(url, href)
                if full not in seen_links:
                    seen_links.add(full)
                    links.append(full)
            url = urljoin(url, page.next_url) if page.next_url else None
        return links

    def _record_checkpoint(self, pid: str) -> None:
        with self._cp_lock:
            self.done.add(pid)
            if self.job.checkpoint_path is not None:
                with open(self.job.checkpoint_path, "a", encoding="utf-8") as fh:
                    fh.write(pid + "\n")
                    fh.flush()

    def _detail(self, url: str) -> tuple[str, PaperRecord | None, str | None]:
        pid = paper_id(self.job.venue, self.job.year, url)
        page = parse_page(self.fetch(url), self.job.shape)
        title = page.text(self.job.shape.title_id)
        abstract = page.text(self.job.shape.abstract_id)
        if not title:
            return pid, None, "detail page has no title region"
        try:
            rec = record_from_mapping({"id": pid, "venue": self.job.venue, "year": self.job.year,
                                       "title": title, "abstract": abstract or ""})
        except ValueError as exc:
            return pid, None, str(exc)
        self._record_checkpoint(pid)
        return pid, rec, None

    def run(self) -> tuple[list[PaperRecord], HarvestReport]:
        report = HarvestReport()
        todo = []
        for url in self.discover(report):
            if paper_id(self.job.venue, self.job.year, url) in self.done:
                report.skipped += 1
            else:
                todo.append(url)
        with ThreadPoolExecutor(max_workers=self.job.workers) as pool:
            results = list(pool.map(self._detail, todo))
        records = []
        for url, (pid, rec, err) in zip(todo, results):
            if rec is None:
                report.failed += 1
                report.diagnostics.append(ItemDiagnostic(url, err or "unparsable"))
            else:
                report.fetched += 1
                records.append(rec)
        return records, report


def harvest(job: HarvestJob, transport: Transport = urllib_transport, **kwargs) -> tuple[list[PaperRecord], HarvestReport]:
    return Harvester(job, transport, **kwargs).run()


def read_checkpoint(path: str | Path) -> set[str]:
    path = Path(path)
    if not path.exists():
        return set()
    return {ln.strip() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()}


def records_jsonl(records: Iterable[PaperRecord]) -> str:
    lines = []
    for r in records:
        lines.append(json.dumps({"id": r.id, "venue": r.venue, "year": r.year, "title": r.title,
                                 "abstract": r.abstract}, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)
