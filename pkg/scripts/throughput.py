"""Time normalization + labeling on a synthetic corpus of abstract-length records.

    python scripts/throughput.py --docs 26104 --chars 1500 --workers 1 4
"""
import argparse
import os
import time

from trendlex.lexicon import label_corpus, starter_lexicon
from trendlex.synthetic import benchmark_records


def time_labeling(records, lex, workers: int) -> float:
    t0 = time.perf_counter()
    label_corpus(records, lex, workers=workers)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--docs", type=int, default=26104)
    ap.add_argument("--chars", type=int, default=1500)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 4])
    args = ap.parse_args()
    lex = starter_lexicon()
    records = benchmark_records(args.docs, args.chars)
    mean = sum(len(r.title) + len(r.abstract) for r in records) / len(records)
    print(f"{len(records)} records, mean {mean:.0f} chars, {os.cpu_count()} cpus")
    base = None
    for w in args.workers:
        dt = time_labeling(records, lex, w)
        base = base or dt
        print(f"workers={w}: {dt:.2f}s ({len(records) / dt:.0f} docs/s, speedup {base / dt:.2f}x)")


if __name__ == "__main__":
    main()
