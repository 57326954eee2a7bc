"""Paper records: ingestion, filtering, deduplication and the on-disk corpus store."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

FORMAT_VERSION = "1"
DEFAULT_TREND_ONLY_YEAR = 2022
RECORDS_FILE = "records.jsonl"
HEADER_FILE = "header.json"


class CorpusError(Exception):
    pass


class CorpusNotFoundError(CorpusError, FileNotFoundError):
    pass


class FormatVersionError(CorpusError):
    def __init__(self, found: str, expected: str):
        super().__init__(f"corpus format version {found!r} does not match supported version {expected!r}")
        self.found = found
        self.expected = expected


@dataclass(frozen=True)
class PaperRecord:
    id: str
    venue: str
    year: int
    title: str
    abstract: str
    trend_only: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass
class SliceStats:
    raw_count: int = 0
    empty_dropped: int = 0
    duplicate_dropped: int = 0
    retained: int = 0


@dataclass
class CorpusStats:
    slices: dict[tuple[str, int], SliceStats] = field(default_factory=dict)

    @property
    def total_retained(self) -> int:
        return sum(s.retained for s in self.slices.values())

    @property
    def total_raw(self) -> int:
        return sum(s.raw_count for s in self.slices.values())

    def slice(self, venue: str, year: int) -> SliceStats:
        return self.slices.setdefault((venue, year), SliceStats())

    def to_dict(self) -> dict:
        return {
            "slices": [
                {"venue": v, "year": y, **asdict(s)}
                for (v, y), s in sorted(self.slices.items())
            ],
            "total_retained": self.total_retained,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusStats":
        stats = cls()
        for row in data.get("slices", []):
            stats.slices[(row["venue"], int(row["year"]))] = SliceStats(
                raw_count=row["raw_count"],
                empty_dropped=row["empty_dropped"],
                duplicate_dropped=row["duplicate_dropped"],
                retained=row["retained"],
            )
        return stats

    def format_table(self) -> str:
        lines = ["venue     year      raw    empty      dup retained"]
        for (venue, year), s in sorted(self.slices.items()):
            lines.append(
                f"{venue:<9} {year:>4} {s.raw_count:>8} {s.empty_dropped:>8} "
                f"{s.duplicate_dropped:>8} {s.retained:>8}"
            )
        lines.append(f"total retained: {self.total_retained}")
        return "\n".join(lines)


def max_valid_year() -> int:
    return _dt.date.today().year + 1


def derive_id(venue: str, year: int, title: str, abstract: str) -> str:
    digest = hashlib.sha1(f"{venue}\x1f{year}\x1f{title}\x1f{abstract}".encode("utf-8")).hexdigest()
    return f"{venue}-{year}-{digest[:12]}"


def _parse_year(value) -> int:
    if isinstance(value, bool):
        raise ValueError(f"unparsable year {value!r}")
    if isinstance(value, int):
        year = value
    elif isinstance(value, float) and value.is_integer():
        year = int(value)
    elif isinstance(value, str) and value.strip().isdigit():
        year = int(value.strip())
    else:
        raise ValueError(f"unparsable year {value!r}")
    if not 1900 <= year <= max_valid_year():
        raise ValueError(f"year {year} outside [1900, {max_valid_year()}]")
    return year


def record_from_mapping(obj: dict, trend_only_year: int | None = DEFAULT_TREND_ONLY_YEAR) -> PaperRecord:
    """Build a record from one decoded input object; raises ValueError on bad fields."""
    for key in ("venue", "year", "title"):
        if key not in obj:
            raise ValueError(f"missing field {key!r}")
    venue = obj["venue"]
    title = obj["title"]
    if not isinstance(venue, str) or not venue.strip():
        raise ValueError("venue must be a non-empty string")
    if not isinstance(title, str):
        raise ValueError("title must be a string")
    abstract = obj.get("abstract") or ""
    if not isinstance(abstract, str):
        raise ValueError("abstract must be a string")
    year = _parse_year(obj["year"])
    venue = venue.strip().lower()
    rid = obj.get("id")
    if rid is None or (isinstance(rid, str) and not rid.strip()):
        rid = derive_id(venue, year, title, abstract)
    return PaperRecord(
        id=str(rid),
        venue=venue,
        year=year,
        title=title,
        abstract=abstract,
        trend_only=trend_only_year is not None and year == trend_only_year,
    )


def parse_records(
    stream: Iterable[str], trend_only_year: int | None = DEFAULT_TREND_ONLY_YEAR
) -> tuple[list[PaperRecord], list[Diagnostic]]:
    """Parse line-delimited JSON records.

    Malformed lines produce a Diagnostic and parsing continues. Blank lines are
    skipped silently.
    """
    records: list[PaperRecord] = []
    diagnostics: list[Diagnostic] = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(Diagnostic(lineno, f"not a JSON object: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            diagnostics.append(Diagnostic(lineno, "not a JSON object"))
            continue
        try:
            records.append(record_from_mapping(obj, trend_only_year))
        except ValueError as exc:
            diagnostics.append(Diagnostic(lineno, str(exc)))
    return records, diagnostics


def parse_file(path: str | Path, trend_only_year: int | None = DEFAULT_TREND_ONLY_YEAR):
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh, trend_only_year)


def dedup_key(record: PaperRecord) -> tuple[str, int, str]:
    return record.venue, record.year, " ".join(record.title.casefold().split())


def filter_and_dedup(records: Iterable[PaperRecord]) -> tuple[list[PaperRecord], CorpusStats]:
    """Drop empty-abstract records and duplicates; first occurrence wins.

    A record whose id was already retained is also counted as a duplicate, which
    keeps ids unique in the output.
    """
    stats = CorpusStats()
    seen_keys: set[tuple[str, int, str]] = set()
    seen_ids: set[str] = set()
    retained: list[PaperRecord] = []
    for rec in records:
        s = stats.slice(rec.venue, rec.year)
        s.raw_count += 1
        if not rec.abstract.strip():
            s.empty_dropped += 1
            continue
        key = dedup_key(rec)
        if key in seen_keys or rec.id in seen_ids:
            s.duplicate_dropped += 1
            continue
        seen_keys.add(key)
        seen_ids.add(rec.id)
        s.retained += 1
        retained.append(rec)
    return retained, stats


def canonical_order(records: Iterable[PaperRecord]) -> list[PaperRecord]:
    return sorted(records, key=lambda r: (r.venue, r.year, r.id, r.title, r.abstract))


@dataclass(frozen=True)
class Slice:
    venue: str
    year: int
    records: tuple[PaperRecord, ...]
    absent: bool

    def __len__(self) -> int:
        return len(self.records)


class Corpus:
    """Read-only collection of retained records with (venue, year) slicing."""

    def __init__(self, records: Iterable[PaperRecord], stats: CorpusStats | None = None):
        self.records: tuple[PaperRecord, ...] = tuple(records)
        self._by_id = {r.id: r for r in self.records}
        if len(self._by_id) != len(self.records):
            raise CorpusError("record ids are not unique")
        self._slices: dict[tuple[str, int], list[PaperRecord]] = {}
        for r in self.records:
            self._slices.setdefault((r.venue, r.year), []).append(r)
        if stats is None:
            stats = filter_and_dedup(self.records)[1]
        self.stats = stats

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self.records)

    def get(self, record_id: str) -> PaperRecord:
        return self._by_id[record_id]

    def venues(self) -> list[str]:
        return sorted({v for v, _ in self._slices})

    def years(self) -> list[int]:
        return sorted({y for _, y in self._slices})

    def pairs(self) -> list[tuple[str, int]]:
        return sorted(self._slices)

    def slice(self, venue: str | None = None, year: int | None = None) -> Slice:
        """Records for one venue/year; either may be None to pool over it."""
        recs = [
            r for (v, y), rs in sorted(self._slices.items())
            if (venue is None or v == venue) and (year is None or y == year)
            for r in rs
        ]
        return Slice(venue or "*", year if year is not None else -1, tuple(recs), absent=not recs)


def persist_corpus(records: Iterable[PaperRecord] | Corpus, path: str | Path, stats: CorpusStats | None = None) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if isinstance(records, Corpus):
        stats = stats or records.stats
        records = records.records
    records = list(records)
    if stats is None:
        stats = filter_and_dedup(records)[1]
    with open(path / RECORDS_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
    header = {"format_version": FORMAT_VERSION, "record_count": len(records), "stats": stats.to_dict()}
    (path / HEADER_FILE).write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    header_path = path / HEADER_FILE
    if not header_path.is_file() or not (path / RECORDS_FILE).is_file():
        raise CorpusNotFoundError(f"no persisted corpus at {path}")
    header = json.loads(header_path.read_text(encoding="utf-8"))
    found = str(header.get("format_version"))
    if found != FORMAT_VERSION:
        raise FormatVersionError(found, FORMAT_VERSION)
    records = []
    with open(path / RECORDS_FILE, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(PaperRecord(**json.loads(line)))
    return Corpus(records, CorpusStats.from_dict(header.get("stats", {})))
