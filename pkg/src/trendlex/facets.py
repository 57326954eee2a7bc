"""Fine-grained facet shares within one category's subset of abstracts."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .lexicon import FacetSpec, LabelMatrix, Lexicon
from .stats import FRACTION, YearlySeries, ls_slope, trend_pp


class EmptySubset(Exception):
    def __init__(self, facet: str, category: str, year: int, venue: str | None = None):
        where = f" at {venue}" if venue else ""
        super().__init__(f"facet {facet!r}: no {category!r} abstracts in {year}{where}; shares are undefined")
        self.facet = facet
        self.category = category
        self.year = year
        self.venue = venue


@dataclass
class FacetRow:
    item: str
    numerators: list[int]
    shares: list[float]
    trend_pp: float | None = None
    slope_pp_per_year: float | None = None


@dataclass
class FacetShareTable:
    facet: str
    within_category: str
    years: list[int]
    denominators: list[int]
    rows: list[FacetRow] = field(default_factory=list)
    title: str = ""
    venue: str | None = None

    def row(self, item: str) -> FacetRow:
        for r in self.rows:
            if r.item == item:
                return r
        raise KeyError(item)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["item", "year", "numerator", "denominator", "share"])
        for r in self.rows:
            for year, num, den, share in zip(self.years, r.numerators, self.denominators, r.shares):
                w.writerow([r.item, year, num, den, f"{share:.6f}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, facet: str, within_category: str, title: str = "",
                 venue: str | None = None) -> "FacetShareTable":
        """Rebuild a table from ``to_csv`` output; shares come from the integer counts."""
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError(f"facet {facet!r}: CSV has no rows")
        years: list[int] = []
        dens: dict[int, int] = {}
        nums: dict[str, dict[int, int]] = {}
        for r in rows:
            y = int(r["year"])
            if y not in dens:
                years.append(y)
                dens[y] = int(r["denominator"])
            nums.setdefault(r["item"], {})[y] = int(r["numerator"])
        table = cls(facet, within_category, years, [dens[y] for y in years], title=title, venue=venue)
        for item, by_year in nums.items():
            counts = [by_year[y] for y in years]
            table.rows.append(FacetRow(item, counts, [n / dens[y] for n, y in zip(counts, years)]))
        return table


def facet_registry(lex: Lexicon) -> list[FacetSpec]:
    return list(lex.facets)


def mine_facet(
    facet: FacetSpec,
    labels: LabelMatrix,
    years: Sequence[int],
    venue: str | None = None,
    include_trend_only: bool = False,
) -> FacetShareTable:
    """Yearly share of subset abstracts mentioning each facet item.

    The subset is the records labeled with ``facet.within_category``; trend-only
    records are excluded unless asked for. Venues are pooled unless ``venue``
    is given.
    """
    if not years:
        raise ValueError("years must be non-empty")
    in_subset = labels.column(facet.within_category)
    denominators = {y: 0 for y in years}
    numerators = {item: {y: 0 for y in years} for item in facet.item_names()}
    for i, flag in enumerate(in_subset):
        if not flag:
            continue
        year = int(labels.years[i])
        if year not in denominators:
            continue
        if labels.trend_only[i] and not include_trend_only:
            continue
        if venue is not None and labels.venues[i] != venue:
            continue
        denominators[year] += 1
        for item in labels.facet_hits[i].get(facet.name, ()):
            numerators[item][year] += 1
    for y in years:
        if denominators[y] == 0:
            raise EmptySubset(facet.name, facet.within_category, y, venue)
    table = FacetShareTable(
        facet=facet.name,
        within_category=facet.within_category,
        years=list(years),
        denominators=[denominators[y] for y in years],
        title=facet.title,
        venue=venue,
    )
    for item in facet.item_names():
        nums = [numerators[item][y] for y in years]
        table.rows.append(FacetRow(item, nums, [n / denominators[y] for n, y in zip(nums, years)]))
    return table


def summarize(table: FacetShareTable) -> FacetShareTable:
    """Fill each row's trend (pp) and least-squares slope (pp/yr) in place."""
    for r in table.rows:
        series = YearlySeries.of(r.item, table.years, r.shares, FRACTION)
        r.trend_pp = trend_pp(series)
        r.slope_pp_per_year = ls_slope(series)
    return table
