"""Write the bundled synthetic corpus (or a larger one for benchmarking).

    python scripts/make_synthetic_corpus.py                      # bundled file
    python scripts/make_synthetic_corpus.py --scale 1 --chars 1500 --out big.jsonl
"""
import argparse
from pathlib import Path

from trendlex.synthetic import generate, paper_shaped_counts, to_jsonl

BUNDLED = Path(__file__).resolve().parents[1] / "src" / "trendlex" / "data" / "synthetic_corpus.jsonl"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scale", type=float, default=0.02)
    ap.add_argument("--chars", type=int, default=400)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--empty-every", type=int, default=97)
    ap.add_argument("--duplicate-every", type=int, default=61)
    ap.add_argument("--out", type=Path, default=BUNDLED)
    args = ap.parse_args()
    rows = generate(paper_shaped_counts(args.scale), seed=args.seed, target_chars=args.chars,
                    empty_every=args.empty_every, duplicate_every=args.duplicate_every)
    args.out.write_text(to_jsonl(rows), encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
