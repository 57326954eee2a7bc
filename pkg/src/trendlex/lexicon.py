"""Category lexicon: loading, compilation and multi-label assignment."""
from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from .normalize import NormalizedDoc, PhraseTable, StopwordSet, normalize_document

REGEX_FLAGS = re.IGNORECASE
STARTER_LEXICON = "starter_lexicon.yaml"


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Pattern:
    source: str
    substring: bool = False

    def wrapped(self) -> str:
        if self.substring:
            return f"(?:{self.source})"
        # Token boundaries: the matcher runs over space-joined tokens.
        return rf"(?<!\S)(?:{self.source})(?!\S)"


@dataclass(frozen=True)
class Matcher:
    """Compiled alternation of a pattern list.

    Tokens are joined by single spaces, so "no non-space before" is the same as
    "a space before" once the text gets a leading space. Spelling the boundary
    as a literal space lets the regex engine skip ahead instead of trying every
    position. Lists with substring patterns keep the lookbehind form.
    """

    regex: re.Pattern
    padded: bool
    prefixes: tuple[str, ...] = ()

    def finditer(self, text: str, probe: str | None = None):
        """``probe`` is " " + text.lower() for ASCII text; it lets a list whose
        patterns all start with a literal skip the scan when none occurs."""
        if self.padded:
            if probe is not None and self.prefixes and not any(p in probe for p in self.prefixes):
                return iter(())
            return (m.group(0)[1:] for m in self.regex.finditer(" " + text))
        return (m.group(0) for m in self.regex.finditer(text))

    def search(self, text: str, probe: str | None = None) -> bool:
        return any(self.finditer(text, probe))


_LITERAL = frozenset("abcdefghijklmnopqrstuvwxyz0123456789 _")


def _class_end(source: str, i: int) -> int:
    """Index just past the character class opening at source[i]."""
    j = i + 1
    if j < len(source) and source[j] == "^":
        j += 1
    if j < len(source) and source[j] == "]":
        j += 1
    while j < len(source):
        if source[j] == "\\":
            j += 2
        elif source[j] == "]":
            return j + 1
        else:
            j += 1
    return -1


def _top_level_split(source: str) -> list[str] | None:
    """Split at "|" outside groups and classes; None if the source looks malformed."""
    parts, depth, start, i = [], 0, 0, 0
    while i < len(source):
        ch = source[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "[":
            i = _class_end(source, i)
            if i < 0:
                return None
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "|" and depth == 0:
            parts.append(source[start:i])
            start = i + 1
        i += 1
    return parts + [source[start:]]


def _literal_run(source: str) -> str:
    n = 0
    while n < len(source) and source[n].isascii() and source[n].lower() in _LITERAL:
        n += 1
    if n < len(source) and source[n] in "?*{":
        n -= 1
    return source[:max(n, 0)].lower()


def _branch_prefixes(branch: str) -> tuple[str, ...]:
    if branch.startswith("(?:"):
        close = branch.find(")")
        inner = branch[3:close]
        alts = inner.split("|")
        if close < 0 or not all(alts) or not all(_literal_run(x) == x.lower() for x in alts):
            return ()
        rest = branch[close + 1:]
        if rest[:1] in ("?", "*"):
            tail = _branch_prefixes(rest[1:])
            return tuple(x.lower() for x in alts) + tail if tail else ()
        if rest[:1] == "{":
            return ()
        return tuple(x.lower() for x in alts)
    run = _literal_run(branch)
    if not run and branch[1:2] in ("?", "*") and _literal_run(branch[:1]):
        tail = _branch_prefixes(branch[2:])
        return (branch[0].lower(),) + tail if tail else ()
    return (run,) if run else ()


def literal_prefixes(source: str) -> tuple[str, ...]:
    """ASCII literals one of which every match of ``source`` starts with (empty if unknown)."""
    branches = _top_level_split(source)
    if not branches:
        return ()
    out: list[str] = []
    for branch in branches:
        found = _branch_prefixes(branch)
        if not found:
            return ()
        out.extend(found)
    return tuple(out)


def _compile_patterns(patterns: Sequence[Pattern], where: str) -> Matcher:
    if not patterns:
        raise LexiconError(f"{where} has no patterns")
    for i, p in enumerate(patterns):
        try:
            re.compile(p.source, REGEX_FLAGS)
        except re.error as exc:
            raise LexiconError(f"{where}: pattern {i} ({p.source!r}) does not compile: {exc}") from None
    if any(p.substring for p in patterns):
        return Matcher(re.compile("|".join(p.wrapped() for p in patterns), REGEX_FLAGS), False)
    prefixes = [literal_prefixes(p.source) for p in patterns]
    probes = tuple(" " + x for found in prefixes for x in found) if all(prefixes) else ()
    return Matcher(re.compile("|".join(rf" (?:{p.source})(?!\S)" for p in patterns), REGEX_FLAGS), True, probes)


@dataclass(frozen=True)
class CategoryRule:
    name: str
    patterns: tuple[Pattern, ...]
    description: str = ""
    regex: Matcher = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.name:
            raise LexiconError("category without a name")
        object.__setattr__(self, "regex", _compile_patterns(self.patterns, f"category {self.name!r}"))


@dataclass(frozen=True)
class FacetItem:
    name: str
    patterns: tuple[Pattern, ...]
    regex: Matcher = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "regex", _compile_patterns(self.patterns, f"facet item {self.name!r}"))


@dataclass(frozen=True)
class FacetSpec:
    name: str
    within_category: str
    items: tuple[FacetItem, ...]
    title: str = ""

    def __post_init__(self):
        names = [i.name for i in self.items]
        dupes = sorted(n for n, c in Counter(names).items() if c > 1)
        if dupes:
            raise LexiconError(f"facet {self.name!r} has duplicate items: {', '.join(dupes)}")

    def item_names(self) -> list[str]:
        return [i.name for i in self.items]


@dataclass(frozen=True)
class Lexicon:
    version: str
    categories: tuple[CategoryRule, ...]
    phrase_table: PhraseTable = PhraseTable()
    stopwords: StopwordSet = StopwordSet()
    facets: tuple[FacetSpec, ...] = ()

    def __post_init__(self):
        if not self.version:
            raise LexiconError("lexicon version is empty")
        for kind, names in (("category", self.category_names()), ("facet", [f.name for f in self.facets])):
            for name, count in Counter(names).items():
                if count > 1:
                    raise LexiconError(f"duplicate {kind} name {name!r}")
        known = set(self.category_names())
        for f in self.facets:
            if f.within_category not in known:
                raise LexiconError(f"facet {f.name!r} refers to unknown category {f.within_category!r}")
        clash = self.phrase_table.joined_tokens() & self.stopwords.all
        if clash:
            raise LexiconError(f"stopwords collide with protected phrases: {', '.join(sorted(clash))}")

    def category_names(self) -> list[str]:
        return [c.name for c in self.categories]

    def category(self, name: str) -> CategoryRule:
        for c in self.categories:
            if c.name == name:
                return c
        raise KeyError(name)

    def facet(self, name: str) -> FacetSpec:
        for f in self.facets:
            if f.name == name:
                return f
        raise KeyError(name)

    def without_category(self, name: str) -> "Lexicon":
        return Lexicon(
            self.version,
            tuple(c for c in self.categories if c.name != name),
            self.phrase_table,
            self.stopwords,
            tuple(f for f in self.facets if f.within_category != name),
        )

    def summary(self) -> dict:
        return {
            "version": self.version,
            "categories": len(self.categories),
            "patterns": sum(len(c.patterns) for c in self.categories),
            "phrases": len(self.phrase_table.phrases),
            "facets": len(self.facets),
        }


def _patterns(raw, where: str) -> tuple[Pattern, ...]:
    if not isinstance(raw, list):
        raise LexiconError(f"{where}: patterns must be a list")
    out = []
    for i, p in enumerate(raw):
        if isinstance(p, str):
            out.append(Pattern(p))
        elif isinstance(p, dict) and isinstance(p.get("pattern"), str):
            out.append(Pattern(p["pattern"], bool(p.get("substring", False))))
        else:
            raise LexiconError(f"{where}: pattern {i} must be a string or {{pattern, substring}} mapping")
    return tuple(out)


def lexicon_from_dict(data: dict) -> Lexicon:
    if not isinstance(data, dict):
        raise LexiconError("lexicon document must be a mapping")
    categories = []
    for entry in data.get("categories") or []:
        name = entry.get("name", "")
        categories.append(
            CategoryRule(name, _patterns(entry.get("patterns") or [], f"category {name!r}"), entry.get("description", ""))
        )
    facets = []
    for entry in data.get("facets") or []:
        items = tuple(
            FacetItem(item["name"], _patterns(item.get("patterns") or [], f"facet item {item['name']!r}"))
            for item in entry.get("items") or []
        )
        facets.append(FacetSpec(entry["name"], entry.get("within", ""), items, entry.get("title", "")))
    stops = data.get("stopwords") or {}
    for group in ("general", "domain_generic"):
        bad = [w for w in stops.get(group) or [] if not isinstance(w, str)]
        if bad:
            raise LexiconError(f"stopwords.{group} has non-string entries {bad!r}; quote them")
    return Lexicon(
        version=str(data.get("version") or ""),
        categories=tuple(categories),
        phrase_table=PhraseTable.of(data.get("phrases") or []),
        stopwords=StopwordSet.of(stops.get("general") or [], stops.get("domain_generic") or []),
        facets=tuple(facets),
    )


def load_lexicon(source: str) -> Lexicon:
    """Parse a lexicon document (YAML text)."""
    try:
        data = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise LexiconError(f"lexicon is not valid YAML: {exc}") from None
    return lexicon_from_dict(data)


def load_lexicon_file(path: str | Path) -> Lexicon:
    return load_lexicon(Path(path).read_text(encoding="utf-8"))


def starter_lexicon_text() -> str:
    return resources.files("trendlex").joinpath("data", STARTER_LEXICON).read_text(encoding="utf-8")


def starter_lexicon() -> Lexicon:
    return load_lexicon(starter_lexicon_text())


# -- labeling -----------------------------------------------------------------

@dataclass(frozen=True)
class DocLabels:
    record_id: str
    labels: tuple[bool, ...]
    terms: dict[str, dict[str, int]]
    facet_hits: dict[str, tuple[str, ...]]


def match_terms(matcher: Matcher, text: str, probe: str | None = None) -> dict[str, int]:
    # Zero-width matches carry no term, so they never label a document.
    return dict(Counter(t.lower() for t in matcher.finditer(text, probe) if t))


def label_document(doc: NormalizedDoc, lex: Lexicon) -> DocLabels:
    """Assign every category whose patterns match the token stream.

    Facet items are matched too, but only for facets whose subset category
    fired, so facet numerators never leave their subset.
    """
    text = doc.text
    probe = " " + text.lower() if text.isascii() else None
    labels = []
    terms: dict[str, dict[str, int]] = {}
    for cat in lex.categories:
        found = match_terms(cat.regex, text, probe)
        labels.append(bool(found))
        if found:
            terms[cat.name] = found
    hits: dict[str, tuple[str, ...]] = {}
    for facet in lex.facets:
        if facet.within_category in terms:
            hits[facet.name] = tuple(i.name for i in facet.items if i.regex.search(text, probe))
    return DocLabels(doc.record_id, tuple(labels), terms, hits)


@dataclass
class LabelMatrix:
    """Records (rows, sorted by id) x categories (columns), plus matched-term bookkeeping."""

    categories: tuple[str, ...]
    record_ids: tuple[str, ...]
    venues: tuple[str, ...]
    years: np.ndarray
    trend_only: np.ndarray
    cells: np.ndarray
    terms: tuple[dict[str, dict[str, int]], ...]
    facet_hits: tuple[dict[str, tuple[str, ...]], ...]
    lexicon_version: str = ""

    def __len__(self) -> int:
        return len(self.record_ids)

    def col(self, category: str) -> int:
        try:
            return self.categories.index(category)
        except ValueError:
            raise KeyError(category) from None

    def column(self, category: str) -> np.ndarray:
        return self.cells[:, self.col(category)]

    def column_sum(self, category: str) -> int:
        return int(self.column(category).sum())

    def row(self, record_id: str) -> dict[str, bool]:
        i = self.record_ids.index(record_id)
        return dict(zip(self.categories, map(bool, self.cells[i])))

    def select(self, mask: np.ndarray) -> "LabelMatrix":
        idx = np.flatnonzero(mask)
        return LabelMatrix(
            categories=self.categories,
            record_ids=tuple(self.record_ids[i] for i in idx),
            venues=tuple(self.venues[i] for i in idx),
            years=self.years[idx],
            trend_only=self.trend_only[idx],
            cells=self.cells[idx],
            terms=tuple(self.terms[i] for i in idx),
            facet_hits=tuple(self.facet_hits[i] for i in idx),
            lexicon_version=self.lexicon_version,
        )

    def for_venues(self, venues: Iterable[str] | None) -> "LabelMatrix":
        if not venues:
            return self
        keep = set(venues)
        return self.select(np.array([v in keep for v in self.venues], dtype=bool))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["record_id", *self.categories])
        for rid, row in zip(self.record_ids, self.cells):
            w.writerow([rid, *(int(v) for v in row)])
        return buf.getvalue()

    def details_jsonl(self) -> str:
        lines = [json.dumps({"lexicon_version": self.lexicon_version, "categories": list(self.categories)})]
        for i, rid in enumerate(self.record_ids):
            lines.append(json.dumps({
                "id": rid,
                "venue": self.venues[i],
                "year": int(self.years[i]),
                "trend_only": bool(self.trend_only[i]),
                "labels": [c for c, v in zip(self.categories, self.cells[i]) if v],
                "terms": self.terms[i],
                "facets": {k: list(v) for k, v in self.facet_hits[i].items()},
            }, sort_keys=True, ensure_ascii=False))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_details_jsonl(cls, text: str) -> "LabelMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        categories = tuple(head["categories"])
        rows = [json.loads(ln) for ln in lines[1:]]
        cells = np.zeros((len(rows), len(categories)), dtype=bool)
        index = {c: j for j, c in enumerate(categories)}
        for i, r in enumerate(rows):
            for c in r["labels"]:
                cells[i, index[c]] = True
        return cls(
            categories=categories,
            record_ids=tuple(r["id"] for r in rows),
            venues=tuple(r["venue"] for r in rows),
            years=np.array([r["year"] for r in rows], dtype=int),
            trend_only=np.array([r["trend_only"] for r in rows], dtype=bool),
            cells=cells,
            terms=tuple(r["terms"] for r in rows),
            facet_hits=tuple({k: tuple(v) for k, v in r["facets"].items()} for r in rows),
            lexicon_version=head.get("lexicon_version", ""),
        )


_WORKER_LEX: Lexicon | None = None


def _init_worker(lex: Lexicon) -> None:
    global _WORKER_LEX
    _WORKER_LEX = lex


def _label_chunk(records) -> list[DocLabels]:
    lex = _WORKER_LEX
    return [label_document(normalize_document(r, lex.phrase_table, lex.stopwords), lex) for r in records]


def _chunks(seq: Sequence, n: int) -> Iterable[Sequence]:
    size = max(1, -(-len(seq) // n))
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def label_corpus(corpus: Iterable, lex: Lexicon, workers: int = 1) -> LabelMatrix:
    """Normalize and label every record; rows come back sorted by record id."""
    records = sorted(corpus, key=lambda r: r.id)
    if workers > 1 and len(records) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(lex,)) as pool:
            parts = list(pool.map(_label_chunk, _chunks(records, workers * 4)))
        rows = [row for part in parts for row in part]
    else:
        _init_worker(lex)
        rows = _label_chunk(records)
    k = len(lex.categories)
    cells = np.array([r.labels for r in rows], dtype=bool).reshape(len(rows), k)
    return LabelMatrix(
        categories=tuple(lex.category_names()),
        record_ids=tuple(r.id for r in records),
        venues=tuple(r.venue for r in records),
        years=np.array([r.year for r in records], dtype=int),
        trend_only=np.array([r.trend_only for r in records], dtype=bool),
        cells=cells,
        terms=tuple(r.terms for r in rows),
        facet_hits=tuple(r.facet_hits for r in rows),
        lexicon_version=lex.version,
    )
