"""Yearly prevalence, trend, least-squares slope and TF-IDF mass trajectories."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .lexicon import LabelMatrix

TREND_YEARS = (2022, 2023, 2024, 2025)
CONTENT_YEARS = (2023, 2024, 2025)
YEAR_PRESETS = {"trend": TREND_YEARS, "content": CONTENT_YEARS}

FRACTION, PP, MASS = "fraction", "pp", "mass"


class StatsError(Exception):
    pass


class MissingYear(StatsError):
    def __init__(self, year: int, venue: str | None = None, what: str = "documents"):
        where = f"venue={venue}" if venue else "all venues"
        super().__init__(f"no {what} for year {year} ({where})")
        self.year = year
        self.venue = venue


class InsufficientData(StatsError):
    pass


class BadArgument(StatsError, ValueError):
    pass


class _Absent(Enum):
    ABSENT = "ABSENT"

    def __repr__(self) -> str:
        return "ABSENT"


ABSENT = _Absent.ABSENT


def parse_years(text: str) -> tuple[int, ...]:
    """'trend', 'content', 'A..B' or a comma list."""
    text = text.strip()
    if text in YEAR_PRESETS:
        return YEAR_PRESETS[text]
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise BadArgument(f"empty year range {text!r}")
        return tuple(range(lo, hi + 1))
    years = tuple(int(p) for p in text.split(",") if p.strip())
    if not years or list(years) != sorted(set(years)):
        raise BadArgument(f"years must be non-empty and increasing: {text!r}")
    return years


@dataclass(frozen=True)
class YearlySeries:
    label: str
    points: tuple[tuple[int, float], ...]
    unit: str = FRACTION

    def __post_init__(self):
        years = [y for y, _ in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise BadArgument(f"series {self.label!r}: years must be strictly increasing")
        if self.unit not in (FRACTION, PP, MASS):
            raise BadArgument(f"unknown unit {self.unit!r}")
        if self.unit == FRACTION and any(not 0.0 <= v <= 1.0 for _, v in self.points):
            raise BadArgument(f"series {self.label!r}: fraction outside [0, 1]")

    @classmethod
    def of(cls, label: str, years: Iterable[int], values: Iterable[float], unit: str = FRACTION) -> "YearlySeries":
        return cls(label, tuple((int(y), float(v)) for y, v in zip(years, values)), unit)

    @property
    def years(self) -> list[int]:
        return [y for y, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def scaled(self) -> list[float]:
        """Values on the reporting scale: percentage points for fractions."""
        k = 100.0 if self.unit == FRACTION else 1.0
        return [k * v for v in self.values]


@dataclass(frozen=True)
class TrendSummary:
    label: str
    series: YearlySeries
    trend_pp: float
    slope_pp_per_year: float

    @classmethod
    def of(cls, series: YearlySeries) -> "TrendSummary":
        return cls(series.label, series, trend_pp(series), ls_slope(series))


def trend_pp(series: YearlySeries) -> float:
    """Net change from first to last year, in percentage points."""
    if len(series.points) < 2:
        raise InsufficientData(f"series {series.label!r} needs at least 2 points")
    values = series.scaled()
    return values[-1] - values[0]


def ols_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    if n < 2 or n != len(ys):
        raise InsufficientData("least squares needs at least 2 paired points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise InsufficientData("all x values are equal")
    return math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def ls_slope(series: YearlySeries) -> float:
    """OLS slope of the scaled values against calendar year (pp/yr or mass/yr)."""
    if len(series.points) < 2:
        raise InsufficientData(f"series {series.label!r} needs at least 2 points")
    return ols_slope([float(y) for y in series.years], series.scaled())


def _year_mask(labels: LabelMatrix, year: int, venues: Sequence[str] | None) -> np.ndarray:
    mask = labels.years == year
    if venues:
        mask &= np.isin(np.array(labels.venues, dtype=object), list(venues))
    return mask


def prevalence_series(
    category: str,
    labels: LabelMatrix,
    years: Sequence[int],
    venues: Sequence[str] | str | None = None,
) -> YearlySeries:
    """Fraction of each year's abstracts labeled with ``category`` (trend-only records included)."""
    if isinstance(venues, str):
        venues = [venues]
    col = labels.column(category)
    values = []
    for year in years:
        mask = _year_mask(labels, year, venues)
        total = int(mask.sum())
        if total == 0:
            raise MissingYear(year, ",".join(venues) if venues else None)
        values.append(int(col[mask].sum()) / total)
    return YearlySeries.of(category, years, values, FRACTION)


def idf_table(labels: LabelMatrix) -> dict[str, float]:
    """idf(t) = ln(1 + N/df(t)) over all rows; df counts rows where t was matched by any category."""
    n = len(labels)
    df: dict[str, int] = {}
    for row in labels.terms:
        seen = set()
        for found in row.values():
            seen.update(found)
        for t in seen:
            df[t] = df.get(t, 0) + 1
    return {t: math.log1p(n / d) for t, d in df.items()}


def raw_mass_matrix(labels: LabelMatrix, years: Sequence[int]) -> np.ndarray:
    """Array of shape (categories, years): summed count*idf of matched terms."""
    idf = idf_table(labels)
    year_index = {y: j for j, y in enumerate(years)}
    cat_index = {c: i for i, c in enumerate(labels.categories)}
    acc = [[[] for _ in years] for _ in labels.categories]
    for r, row in enumerate(labels.terms):
        j = year_index.get(int(labels.years[r]))
        if j is None:
            continue
        for cat, found in row.items():
            acc[cat_index[cat]][j].extend(count * idf[t] for t, count in found.items())
    return np.array([[math.fsum(cell) for cell in per_cat] for per_cat in acc], dtype=float).reshape(
        len(labels.categories), len(years)
    )


def normalized_mass_matrix(labels: LabelMatrix, years: Sequence[int]) -> np.ndarray:
    raw = raw_mass_matrix(labels, years)
    totals = raw.sum(axis=0)
    for j, year in enumerate(years):
        if totals[j] <= 0:
            raise MissingYear(year, what="TF-IDF mass")
    return raw / totals


def tfidf_mass_series(
    category: str, labels: LabelMatrix, years: Sequence[int], normalized: bool = True
) -> YearlySeries:
    """Yearly TF-IDF mass of a category's matched terms.

    Uses the matched-term bookkeeping carried by ``labels``. Normalized values
    divide by the total mass of all categories in the same year.
    """
    i = labels.col(category)
    if normalized:
        values = normalized_mass_matrix(labels, years)[i]
    else:
        raw = raw_mass_matrix(labels, years)
        totals = raw.sum(axis=0)
        for j, year in enumerate(years):
            if totals[j] <= 0:
                raise MissingYear(year, what="TF-IDF mass")
        values = raw[i]
    return YearlySeries.of(category, years, values, MASS)


def top_rising(summaries: Sequence[TrendSummary], k: int) -> list[TrendSummary]:
    if not summaries:
        raise BadArgument("no summaries to rank")
    if k < 1 or k > len(summaries):
        raise BadArgument(f"k={k} outside 1..{len(summaries)}")
    return sorted(summaries, key=lambda s: (-s.slope_pp_per_year, s.label))[:k]


def cross_venue_matrix(category: str, labels: LabelMatrix, venues: Sequence[str] | None = None,
                       years: Sequence[int] | None = None) -> dict[tuple[str, int], float | _Absent]:
    """Share of ``category`` per (venue, year); pairs with no records are ABSENT."""
    if category not in labels.categories:
        raise BadArgument(f"unknown category {category!r}")
    col = labels.column(category)
    venue_arr = np.array(labels.venues, dtype=object)
    venues = sorted(set(labels.venues)) if venues is None else list(venues)
    years = sorted(set(int(y) for y in labels.years)) if years is None else list(years)
    out: dict[tuple[str, int], float | _Absent] = {}
    for v in venues:
        for y in years:
            mask = (venue_arr == v) & (labels.years == y)
            total = int(mask.sum())
            out[(v, y)] = ABSENT if total == 0 else int(col[mask].sum()) / total
    return out


def series_csv(series: Iterable[YearlySeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "year", "value", "unit"])
    for s in series:
        for y, v in s.points:
            w.writerow([s.label, y, f"{v:.9f}", s.unit])
    return buf.getvalue()


def summaries_csv(summaries: Iterable[TrendSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "unit", "first_year", "last_year", "trend", "slope"])
    for s in summaries:
        w.writerow([s.label, s.series.unit, s.series.years[0], s.series.years[-1],
                    f"{s.trend_pp:.6f}", f"{s.slope_pp_per_year:.6f}"])
    return buf.getvalue()


def read_series_csv(text: str) -> list[YearlySeries]:
    """Inverse of ``series_csv``; labels keep their first-seen order."""
    grouped: dict[str, tuple[str, list[int], list[float]]] = {}
    for r in csv.DictReader(io.StringIO(text)):
        unit, ys, vs = grouped.setdefault(r["label"], (r["unit"], [], []))
        ys.append(int(r["year"]))
        vs.append(float(r["value"]))
    return [YearlySeries.of(label, ys, vs, unit) for label, (unit, ys, vs) in grouped.items()]
