"""Markdown/CSV tables, hand-emitted SVG figures and the printed-table audit."""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

import yaml

from .facets import FacetShareTable
from .stats import FRACTION, BadArgument, YearlySeries, ls_slope, trend_pp

MINUS = "−"
PANEL_W, PANEL_H, GRID_COLS = 640, 160, 4
FONT = 'font-family="sans-serif" font-size="10pt"'
REFERENCE_TABLES = "reference_tables.yaml"
DISCREPANCY_TOL_PP = 0.15


# -- number formatting ----------------------------------------------------------

def _round(value: float, places: int) -> Decimal:
    q = Decimal(1).scaleb(-places)
    return Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP)


def format_share(fraction: float) -> str:
    """0.395 -> '39.5%' (one decimal, half away from zero)."""
    if not (isinstance(fraction, (int, float)) and 0.0 <= fraction <= 1.0):
        raise BadArgument(f"share {fraction!r} outside [0, 1]")
    pct = Decimal(repr(float(fraction))) * 100
    return f"{pct.quantize(Decimal('0.1'), rounding=ROUND_HALF_UP)}%"


def _signed(value: float, places: int, suffix: str, plus: bool) -> str:
    # Sign follows the unrounded value, so -0.04 renders as "-0.0".
    if abs(value) < 1e-9:
        value = 0.0
    mag = _round(abs(value), places)
    sign = "-" if value < 0 else ("+" if plus else "")
    return f"{sign}{mag}{suffix}"


def format_trend(pp: float) -> str:
    return _signed(pp, 1, "%", plus=True)


def format_slope(pp_per_year: float) -> str:
    return _signed(pp_per_year, 2, "", plus=False)


def kebab(title: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", title.lower()).strip("-")
    return slug or "untitled"


# -- tables -----------------------------------------------------------------------

@dataclass
class TableModel:
    title: str
    headers: list[str]
    rows: list[list[str]] = field(default_factory=list)
    footnotes: list[str] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.headers):
                raise BadArgument(f"row {row!r} has {len(row)} cells, header has {len(self.headers)}")

    def same_content(self, other: "TableModel") -> bool:
        return (self.title, self.headers, self.rows) == (other.title, other.headers, other.rows)


def facet_table_model(table: FacetShareTable, title: str | None = None) -> TableModel:
    headers = ["Item", *map(str, table.years), "Trend", "Slope (pp/yr)"]
    rows = []
    for r in table.rows:
        if r.trend_pp is None or r.slope_pp_per_year is None:
            raise BadArgument(f"row {r.item!r} has no trend/slope; summarize the table first")
        rows.append([r.item, *map(format_share, r.shares), format_trend(r.trend_pp), format_slope(r.slope_pp_per_year)])
    dens = ", ".join(f"{y}: {d}" for y, d in zip(table.years, table.denominators))
    notes = [f"Denominators ({table.within_category} abstracts): {dens}."]
    return TableModel(title or table.title or table.facet, headers, rows, notes)


_NEG_NUMBER = re.compile(r"^-(?=\d)")


def _md_cell(cell: str) -> str:
    return _NEG_NUMBER.sub(MINUS, cell).replace("|", r"\|")


def render_table(model: TableModel, fmt: str = "markdown") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(model.headers)
        w.writerows(model.rows)
        return buf.getvalue()
    if fmt != "markdown":
        raise BadArgument(f"unknown table format {fmt!r}")
    align = ["---"] + ["---:"] * (len(model.headers) - 1)
    lines = [f"### {model.title}", ""]
    lines.append("| " + " | ".join(_md_cell(h) for h in model.headers) + " |")
    lines.append("| " + " | ".join(align) + " |")
    for row in model.rows:
        lines.append("| " + " | ".join(_md_cell(c) for c in row) + " |")
    if model.footnotes:
        lines.append("")
        lines.extend(model.footnotes)
    return "\n".join(lines) + "\n"


def table_from_csv(text: str, title: str) -> TableModel:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise BadArgument("empty CSV")
    return TableModel(title, rows[0], rows[1:])


# -- figures ----------------------------------------------------------------------

SMALL_MULTIPLES, MULTI_LINE, BAR = "small_multiples", "multi_line", "bar"


@dataclass(frozen=True)
class FigureSeries:
    label: str
    points: tuple[tuple[int, float], ...]

    @classmethod
    def from_series(cls, s: YearlySeries) -> "FigureSeries":
        return cls(s.label, tuple(s.points))


@dataclass(frozen=True)
class FigureModel:
    kind: str
    title: str
    series: tuple[FigureSeries, ...] = ()
    bars: tuple[tuple[str, float], ...] = ()
    x_label: str = "Year"
    y_label: str = ""

    def __post_init__(self):
        if self.kind not in (SMALL_MULTIPLES, MULTI_LINE, BAR):
            raise BadArgument(f"unknown figure kind {self.kind!r}")
        for s in self.series:
            if any(not isinstance(x, int) for x, _ in s.points):
                raise BadArgument(f"series {s.label!r}: x values must be integer years")

    def x_ticks(self) -> list[int]:
        return sorted({x for s in self.series for x, _ in s.points})


def _f(v: float) -> str:
    return f"{v:.2f}"


def _axis_label(v: float) -> str:
    return f"{v:.3g}"


def _plot_panel(out: list[str], series: Sequence[FigureSeries], ticks: list[int],
                x0: float, y0: float, w: float, h: float, title: str, y_label: str, x_label: str) -> None:
    left, right, top, bottom = 56, 12, 22, 30
    px, py = x0 + left, y0 + top
    pw, ph = w - left - right, h - top - bottom
    values = [v for s in series for _, v in s.points]
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5 if lo else 0.0, hi + 0.5 if hi else 1.0
    span_x = (ticks[-1] - ticks[0]) or 1

    def sx(x: float) -> float:
        return px + (x - ticks[0]) / span_x * pw if len(ticks) > 1 else px + pw / 2

    def sy(v: float) -> float:
        return py + ph - (v - lo) / (hi - lo) * ph

    out.append(f'<text class="panel-title" x="{_f(x0 + w / 2)}" y="{_f(y0 + 15)}" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<line class="axis" x1="{_f(px)}" y1="{_f(py + ph)}" x2="{_f(px + pw)}" y2="{_f(py + ph)}" stroke="black"/>')
    out.append(f'<line class="axis" x1="{_f(px)}" y1="{_f(py)}" x2="{_f(px)}" y2="{_f(py + ph)}" stroke="black"/>')
    for t in ticks:
        out.append(f'<text class="xtick" x="{_f(sx(t))}" y="{_f(py + ph + 13)}" text-anchor="middle">{t}</text>')
    for v in (lo, hi):
        out.append(f'<text class="ytick" x="{_f(px - 4)}" y="{_f(sy(v) + 4)}" text-anchor="end">{_axis_label(v)}</text>')
    out.append(f'<text class="xlabel" x="{_f(px + pw / 2)}" y="{_f(y0 + h - 3)}" text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        cx, cy = x0 + 10, py + ph / 2
        out.append(f'<text class="ylabel" x="{_f(cx)}" y="{_f(cy)}" text-anchor="middle" '
                   f'transform="rotate(-90 {_f(cx)} {_f(cy)})">{escape(y_label)}</text>')
    for k, s in enumerate(series):
        pts = " ".join(f"{_f(sx(x))},{_f(sy(v))}" for x, v in s.points)
        out.append(f'<polyline class="series" data-label={quoteattr(s.label)} points="{pts}" fill="none" '
                   f'stroke="{_color(k)}" stroke-width="1.5"/>')


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
            "#bcbd22", "#17becf")


def _color(k: int) -> str:
    return _PALETTE[k % len(_PALETTE)]


def render_figure(model: FigureModel) -> str:
    out: list[str] = []
    if model.kind == BAR:
        if not model.bars:
            raise BadArgument("bar figure has no bars")
        bar_h, left, top = 18, 240, 30
        width, height = PANEL_W, top + bar_h * len(model.bars) + 30
        vmax = max(abs(v) for _, v in model.bars) or 1.0
        zero = left + (PANEL_W - left - 20) * (0.5 if any(v < 0 for _, v in model.bars) else 0.0)
        scale = (PANEL_W - 20 - zero) / vmax
        out.append(f'<text class="title" x="{width / 2:.2f}" y="18" text-anchor="middle">{escape(model.title)}</text>')
        for i, (label, v) in enumerate(model.bars):
            y = top + i * bar_h
            x, w = (zero, v * scale) if v >= 0 else (zero + v * scale, -v * scale)
            out.append(f'<g class="bar" data-label={quoteattr(label)}>'
                       f'<rect x="{_f(x)}" y="{_f(y + 2)}" width="{_f(w)}" height="{bar_h - 4}" fill="{_color(0)}"/>'
                       f'<text x="{left - 6}" y="{_f(y + bar_h - 5)}" text-anchor="end">{escape(label)}</text>'
                       f'<text class="value" x="{_f(x + w + 4)}" y="{_f(y + bar_h - 5)}">{v:.4g}</text></g>')
        out.append(f'<line class="axis" x1="{_f(zero)}" y1="{top}" x2="{_f(zero)}" y2="{_f(height - 30)}" stroke="black"/>')
        if model.y_label:
            out.append(f'<text class="xlabel" x="{_f((zero + width) / 2)}" y="{_f(height - 10)}" '
                       f'text-anchor="middle">{escape(model.y_label)}</text>')
    else:
        if not model.series:
            raise BadArgument("figure has no series")
        ticks = model.x_ticks()
        if model.kind == SMALL_MULTIPLES:
            rows = math.ceil(len(model.series) / GRID_COLS)
            width, height = PANEL_W * GRID_COLS, PANEL_H * rows + 30
            out.append(f'<text class="title" x="{width / 2:.2f}" y="20" text-anchor="middle">{escape(model.title)}</text>')
            for i, s in enumerate(model.series):
                x0, y0 = (i % GRID_COLS) * PANEL_W, 30 + (i // GRID_COLS) * PANEL_H
                out.append(f'<g class="panel" data-label={quoteattr(s.label)}>')
                _plot_panel(out, [s], ticks, x0, y0, PANEL_W, PANEL_H, s.label, model.y_label, model.x_label)
                out.append("</g>")
        else:
            plot_h = PANEL_H * 2
            legend_h = 14 * len(model.series)
            width, height = PANEL_W, plot_h + legend_h + 40
            out.append(f'<text class="title" x="{width / 2:.2f}" y="20" text-anchor="middle">{escape(model.title)}</text>')
            out.append('<g class="panel">')
            _plot_panel(out, model.series, ticks, 0, 20, PANEL_W, plot_h, "", model.y_label, model.x_label)
            out.append("</g>")
            out.append('<g class="legend">')
            for k, s in enumerate(model.series):
                y = 20 + plot_h + 16 + 14 * k
                out.append(f'<line x1="60" y1="{y - 4}" x2="80" y2="{y - 4}" stroke="{_color(k)}" stroke-width="2"/>'
                           f'<text x="86" y="{y}">{escape(s.label)}</text>')
            out.append("</g>")
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" {FONT}>')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *out, "</svg>"]) + "\n"


# -- audit of printed tables ------------------------------------------------------

@dataclass(frozen=True)
class PrintedRow:
    item: str
    shares_pct: tuple[float, ...]
    trend: float
    slope: float


@dataclass(frozen=True)
class PrintedTable:
    key: str
    label: str
    years: tuple[int, ...]
    rows: tuple[PrintedRow, ...]


def load_reference_tables(text: str | None = None) -> list[PrintedTable]:
    if text is None:
        text = resources.files("trendlex").joinpath("data", REFERENCE_TABLES).read_text(encoding="utf-8")
    data = yaml.safe_load(text)
    tables = []
    for t in data["tables"]:
        years = tuple(t["years"])
        rows = []
        for r in t["rows"]:
            shares = tuple(float(v) for v in r["shares"])
            if len(shares) != len(years):
                raise BadArgument(f"{t['key']}/{r['item']}: {len(shares)} shares for {len(years)} years")
            rows.append(PrintedRow(r["item"], shares, float(r["trend"]), float(r["slope"])))
        tables.append(PrintedTable(t["key"], t["label"], years, tuple(rows)))
    return tables


def _within(computed: float, printed: float) -> bool:
    # The tolerance is inclusive; the slack absorbs float noise such as 0.15000000000000002.
    return abs(computed - printed) <= DISCREPANCY_TOL_PP + 1e-9


@dataclass(frozen=True)
class AuditedRow:
    table: str
    item: str
    computed_trend: float
    printed_trend: float
    computed_slope: float
    printed_slope: float

    @property
    def trend_ok(self) -> bool:
        return _within(self.computed_trend, self.printed_trend)

    @property
    def slope_ok(self) -> bool:
        return _within(self.computed_slope, self.printed_slope)


def audit_reference(tables: Sequence[PrintedTable]) -> list[AuditedRow]:
    """Recompute trend and OLS slope from each printed share series."""
    out = []
    for t in tables:
        for r in t.rows:
            series = YearlySeries.of(r.item, t.years, [v / 100 for v in r.shares_pct], FRACTION)
            out.append(AuditedRow(t.label, r.item, trend_pp(series), r.trend, ls_slope(series), r.slope))
    return out


def discrepancy_report(rows: Sequence[AuditedRow]) -> str:
    """Markdown listing every Trend/Slope cell off by more than the tolerance."""
    bad = []
    for r in rows:
        if not r.trend_ok:
            bad.append((r.table, r.item, "Trend", r.computed_trend, r.printed_trend))
        if not r.slope_ok:
            bad.append((r.table, r.item, "Slope", r.computed_slope, r.printed_slope))
    if not bad:
        return ""
    n = len(rows)
    trend_ok = sum(r.trend_ok for r in rows)
    slope_ok = sum(r.slope_ok for r in rows)
    lines = [
        "# Printed-table discrepancies",
        "",
        f"Tolerance: {DISCREPANCY_TOL_PP} pp. Trend cells reproduced: {trend_ok}/{n}. "
        f"Slope cells reproduced by OLS on the printed shares: {slope_ok}/{n}.",
        "",
        "| Table | Item | Column | Computed | Printed | Difference |",
        "| --- | --- | --- | ---: | ---: | ---: |",
    ]
    for table, item, col, comp, printed in bad:
        lines.append(f"| {table} | {item} | {col} | {comp:+.2f} | {printed:+.2f} | {comp - printed:+.2f} |")
    return "\n".join(lines) + "\n"
