"""Recompute Trend and OLS slope for every transcribed facet row and list mismatches.

    python scripts/audit_tables.py            # summary + discrepancy markdown
    python scripts/audit_tables.py --rows     # every row, computed vs printed
"""
import argparse

from trendlex.report import audit_reference, discrepancy_report, load_reference_tables


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", action="store_true", help="print every audited row")
    args = ap.parse_args()
    rows = audit_reference(load_reference_tables())
    if args.rows:
        print(f"{'table':<11}{'item':<28}{'trend':>8}{'printed':>9}{'slope':>8}{'printed':>9}")
        for r in rows:
            flag = "" if r.trend_ok and r.slope_ok else "  *"
            print(f"{r.table:<11}{r.item[:27]:<28}{r.computed_trend:>8.2f}{r.printed_trend:>9.2f}"
                  f"{r.computed_slope:>8.2f}{r.printed_slope:>9.2f}{flag}")
        print()
    print(f"trend within tolerance: {sum(r.trend_ok for r in rows)}/{len(rows)}")
    print(f"slope within tolerance: {sum(r.slope_ok for r in rows)}/{len(rows)}")
    print()
    print(discrepancy_report(rows) or "No discrepancies.")


if __name__ == "__main__":
    main()
