"""Command-line entry point: ``trendlex <command> [options]``.

Each stage reads the previous stage's files from the run directory, so
``all`` is the same as running ingest, label, mine, stats, report and audit in
turn.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import yaml

from . import records as rec
from .facets import EmptySubset, FacetShareTable, mine_facet, summarize
from . import harvester as hv
from .lexicon import LabelMatrix, Lexicon, LexiconError, label_corpus, load_lexicon_file, starter_lexicon
from .report import (
    BAR, MULTI_LINE, SMALL_MULTIPLES, FigureModel, FigureSeries, audit_reference, discrepancy_report,
    facet_table_model, kebab, load_reference_tables, render_figure, render_table,
)
from .stats import (
    ABSENT, CONTENT_YEARS, TREND_YEARS, MissingYear, StatsError, TrendSummary, cross_venue_matrix,
    parse_years, prevalence_series, read_series_csv, series_csv, summaries_csv, tfidf_mass_series,
    top_rising,
)

log = logging.getLogger("trendlex")

COMMANDS = ("ingest", "harvest", "label", "mine", "stats", "report", "audit", "all")
STARTER = "starter"
EXIT_OK, EXIT_ERROR, EXIT_MISSING, EXIT_DATA = 0, 1, 2, 3
TOP_RISING_K = 10


class MissingInput(Exception):
    """A referenced file or directory does not exist."""


@dataclass
class HarvestConfig:
    venue: str | None = None
    year: int | None = None
    endpoint: str | None = None
    out: str | None = None
    checkpoint: str | None = None
    rps: float = 1.0


@dataclass
class RunConfig:
    corpus: list[str] = field(default_factory=list)
    lexicon: str | None = None
    trend_years: tuple[int, ...] = TREND_YEARS
    content_years: tuple[int, ...] = CONTENT_YEARS
    venues: list[str] = field(default_factory=list)
    out: str = "trendlex-run"
    workers: int = 1
    harvest: HarvestConfig = field(default_factory=HarvestConfig)

    def __post_init__(self):
        for name in ("trend_years", "content_years"):
            ys = tuple(getattr(self, name))
            if not ys or list(ys) != sorted(set(ys)):
                raise ValueError(f"{name} must be non-empty and strictly increasing, got {ys}")
            setattr(self, name, ys)
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def _years(value) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    return parse_years(str(value))


def _venues(value) -> list[str]:
    if isinstance(value, str):
        value = value.split(",")
    return [v.strip().lower() for v in value or () if v.strip()]


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data or {})
    kw: dict = {}
    if "corpus" in data:
        c = data["corpus"]
        kw["corpus"] = [c] if isinstance(c, str) else list(c)
    for key in ("lexicon", "out"):
        if data.get(key) is not None:
            kw[key] = str(data[key])
    if "workers" in data:
        kw["workers"] = int(data["workers"])
    if "venues" in data:
        kw["venues"] = _venues(data["venues"])
    years = data.get("years")
    if isinstance(years, dict):
        if "trend" in years:
            kw["trend_years"] = _years(years["trend"])
        if "content" in years:
            kw["content_years"] = _years(years["content"])
    elif years is not None:
        kw["trend_years"] = kw["content_years"] = _years(years)
    if isinstance(data.get("harvest"), dict):
        h = data["harvest"]
        kw["harvest"] = HarvestConfig(
            venue=h.get("venue"), year=h.get("year"), endpoint=h.get("endpoint"), out=h.get("out"),
            checkpoint=h.get("checkpoint"), rps=float(h.get("rps", 1.0)),
        )
    return RunConfig(**kw)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise MissingInput(f"config file not found: {p}")
    data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{p}: config must be a mapping")
    return config_from_dict(data)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file first, then command-line flags on top."""
    cfg = load_config(args.config)
    if args.corpus:
        cfg.corpus = list(args.corpus)
    if args.lexicon:
        cfg.lexicon = args.lexicon
    if args.venues:
        cfg.venues = _venues(args.venues)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.years:
        ys = parse_years(args.years)
        # --years retargets whichever range the running stage uses; for "all" both.
        if args.command in ("stats", "all"):
            cfg.trend_years = ys
        if args.command in ("mine", "stats", "all"):
            cfg.content_years = ys
    if args.command == "harvest":
        h = cfg.harvest
        cfg.harvest = replace(
            h,
            venue=args.venue or h.venue,
            year=args.year if args.year is not None else h.year,
            endpoint=args.endpoint or h.endpoint,
            out=args.out or h.out,
            checkpoint=args.checkpoint or h.checkpoint,
            rps=args.rps if args.rps is not None else h.rps,
        )
    elif args.out:
        cfg.out = args.out
    cfg.__post_init__()
    return cfg


# -- stages ---------------------------------------------------------------------

def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _lexicon(cfg: RunConfig) -> Lexicon:
    if not cfg.lexicon:
        raise MissingInput("no lexicon given (use --lexicon PATH, or --lexicon starter for the bundled one)")
    if cfg.lexicon == STARTER:
        return starter_lexicon()
    p = Path(cfg.lexicon)
    if not p.is_file():
        raise MissingInput(f"lexicon file not found: {p}")
    return load_lexicon_file(p)


def _labels(cfg: RunConfig) -> LabelMatrix:
    p = cfg.out_dir / "labels.jsonl"
    if not p.is_file():
        raise MissingInput(f"label details not found: {p} (run 'trendlex label' first)")
    return LabelMatrix.from_details_jsonl(p.read_text(encoding="utf-8")).for_venues(cfg.venues)


def run_ingest(cfg: RunConfig) -> None:
    if not cfg.corpus:
        raise MissingInput("no corpus given (use --corpus PATH)")
    parsed: list[rec.PaperRecord] = []
    diag_lines = []
    for path in cfg.corpus:
        p = Path(path)
        if not p.is_file():
            raise MissingInput(f"corpus file not found: {p}")
        found, diags = rec.parse_file(p)
        parsed.extend(found)
        diag_lines.extend(f"{p.name}:{d}" for d in diags)
    # Sorting before dedup makes the surviving duplicate independent of input order.
    retained, stats = rec.filter_and_dedup(rec.canonical_order(parsed))
    corpus_dir = cfg.out_dir / "corpus"
    rec.persist_corpus(retained, corpus_dir, stats)
    _write(corpus_dir / "diagnostics.txt", "".join(f"{line}\n" for line in sorted(diag_lines)))
    _write(corpus_dir / "counts.txt", stats.format_table().rstrip("\n") + "\n")
    log.info("ingest: %d retained of %d raw, %d diagnostics", stats.total_retained, stats.total_raw, len(diag_lines))


def run_label(cfg: RunConfig) -> None:
    lex = _lexicon(cfg)
    corpus = rec.load_corpus(cfg.out_dir / "corpus")
    labels = label_corpus(corpus, lex, workers=cfg.workers)
    _write(cfg.out_dir / "labels.csv", labels.to_csv())
    _write(cfg.out_dir / "labels.jsonl", labels.details_jsonl())
    log.info("label: %d records x %d categories", len(labels), len(labels.categories))


def run_mine(cfg: RunConfig) -> None:
    lex = _lexicon(cfg)
    labels = _labels(cfg)
    for facet in lex.facets:
        table = mine_facet(facet, labels, cfg.content_years)
        _write(cfg.out_dir / "facets" / f"{facet.name}.csv", table.to_csv())


def _cross_venue_csv(labels: LabelMatrix, years: Sequence[int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["category", "venue", "year", "share"])
    for cat in labels.categories:
        for (venue, year), share in cross_venue_matrix(cat, labels, years=years).items():
            w.writerow([cat, venue, year, "ABSENT" if share is ABSENT else f"{share:.9f}"])
    return buf.getvalue()


def run_stats(cfg: RunConfig) -> None:
    labels = _labels(cfg)
    years = cfg.trend_years
    prevalence = [prevalence_series(c, labels, years) for c in labels.categories]
    raw = [tfidf_mass_series(c, labels, years, normalized=False) for c in labels.categories]
    norm = [tfidf_mass_series(c, labels, years, normalized=True) for c in labels.categories]
    out = cfg.out_dir / "stats"
    _write(out / "prevalence.csv", series_csv(prevalence))
    _write(out / "tfidf_raw.csv", series_csv(raw))
    _write(out / "tfidf_mass.csv", series_csv(norm))
    _write(out / "prevalence_summary.csv", summaries_csv(TrendSummary.of(s) for s in prevalence))
    _write(out / "tfidf_summary.csv", summaries_csv(TrendSummary.of(s) for s in norm))
    _write(out / "cross_venue.csv", _cross_venue_csv(labels, cfg.content_years))


def _read(path: Path, hint: str) -> str:
    if not path.is_file():
        raise MissingInput(f"{path} not found (run 'trendlex {hint}' first)")
    return path.read_text(encoding="utf-8")


def run_report(cfg: RunConfig) -> None:
    lex = _lexicon(cfg)
    out = cfg.out_dir / "report"
    sections = []
    for facet in lex.facets:
        text = _read(cfg.out_dir / "facets" / f"{facet.name}.csv", "mine")
        table = summarize(FacetShareTable.from_csv(text, facet.name, facet.within_category, facet.title))
        sections.append(render_table(facet_table_model(table)))
    _write(out / "tables.md", "\n".join(sections))

    raw = read_series_csv(_read(cfg.out_dir / "stats" / "tfidf_raw.csv", "stats"))
    norm = read_series_csv(_read(cfg.out_dir / "stats" / "tfidf_mass.csv", "stats"))
    figures = [
        FigureModel(MULTI_LINE, "Aggregated TF-IDF mass by direction",
                    tuple(FigureSeries.from_series(s) for s in raw), y_label="TF-IDF mass"),
        FigureModel(SMALL_MULTIPLES, "Normalized topic intensity by direction",
                    tuple(FigureSeries.from_series(s) for s in norm), y_label="share of yearly mass"),
    ]
    rising = top_rising([TrendSummary.of(s) for s in norm], min(TOP_RISING_K, len(norm)))
    figures.append(FigureModel(BAR, "Fastest rising directions",
                               bars=tuple((s.label, s.slope_pp_per_year) for s in rising),
                               y_label="slope of normalized mass per year"))
    for fig in figures:
        _write(out / f"{kebab(fig.title)}.svg", render_figure(fig))


def run_audit(cfg: RunConfig) -> None:
    rows = audit_reference(load_reference_tables())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "item", "computed_trend", "printed_trend", "trend_ok",
                "computed_slope", "printed_slope", "slope_ok"])
    for r in rows:
        w.writerow([r.table, r.item, f"{r.computed_trend:.4f}", f"{r.printed_trend:.1f}", int(r.trend_ok),
                    f"{r.computed_slope:.4f}", f"{r.printed_slope:.2f}", int(r.slope_ok)])
    out = cfg.out_dir / "audit"
    _write(out / "reference_audit.csv", buf.getvalue())
    _write(out / "discrepancies.md", discrepancy_report(rows) or "No discrepancies.\n")


def run_harvest(cfg: RunConfig) -> None:
    h = cfg.harvest
    missing = [n for n in ("venue", "year", "endpoint", "out") if getattr(h, n) in (None, "")]
    if missing:
        raise ValueError("harvest needs " + ", ".join(f"--{n}" for n in missing))
    done = hv.read_checkpoint(h.checkpoint) if h.checkpoint else set()
    job = hv.HarvestJob(venue=h.venue.lower(), year=int(h.year), endpoint=h.endpoint, checkpoint=set(done),
                     rate_limit=h.rps, workers=cfg.workers,
                     checkpoint_path=Path(h.checkpoint) if h.checkpoint else None)
    found, report = hv.harvest(job, hv.urllib_transport)
    out = Path(h.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # A resumed run appends to what the earlier run already wrote.
    with open(out, "a" if done else "w", encoding="utf-8", newline="\n") as fh:
        fh.write(hv.records_jsonl(found))
    for d in report.diagnostics:
        log.warning("harvest: %s: %s", d.url, d.message)
    log.info("harvest: %d fetched, %d skipped, %d failed over %d index pages",
             report.fetched, report.skipped, report.failed, report.pages)


STAGES = {
    "ingest": run_ingest,
    "harvest": run_harvest,
    "label": run_label,
    "mine": run_mine,
    "stats": run_stats,
    "report": run_report,
    "audit": run_audit,
}
PIPELINE = ("ingest", "label", "mine", "stats", "report", "audit")


def run(command: str, cfg: RunConfig) -> int:
    """Run one command; returns the process exit status."""
    try:
        if command == "all":
            for stage in PIPELINE:
                STAGES[stage](cfg)
        else:
            STAGES[command](cfg)
    except (MissingInput, rec.CorpusNotFoundError) as exc:
        print(f"trendlex: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (EmptySubset, MissingYear) as exc:
        print(f"trendlex: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (LexiconError, rec.CorpusError, StatsError, hv.HarvestError, ValueError) as exc:
        print(f"trendlex: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration; flags override its values")
    common.add_argument("--corpus", nargs="+", help="input JSONL record files")
    common.add_argument("--lexicon", help=f"lexicon YAML path, or '{STARTER}' for the bundled lexicon")
    common.add_argument("--years", help="trend, content, A..B or a comma list")
    common.add_argument("--venues", help="comma-separated venue filter")
    common.add_argument("--workers", type=int, help="worker processes for labeling (threads for harvest)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="trendlex", description="Lexicon-driven topic trend mining over paper abstracts.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "harvest":
            p.add_argument("--venue")
            p.add_argument("--year", type=int)
            p.add_argument("--endpoint", help="listing URL template with {venue} and {year}")
            p.add_argument("--out", help="output JSONL file")
            p.add_argument("--checkpoint", help="file of already-fetched paper ids")
            p.add_argument("--rps", type=float, help="requests per second")
        else:
            p.add_argument("--out", help="run directory")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except MissingInput as exc:
        print(f"trendlex: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ValueError, yaml.YAMLError) as exc:
        print(f"trendlex: error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
