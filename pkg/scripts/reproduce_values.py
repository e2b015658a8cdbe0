#!/usr/bin/env python3
"""Recompute the published-values table and write it as CSV.

Usage: python scripts/reproduce_values.py [out.csv]
Exits 0 iff every row passes at its tolerance.
"""

import sys

from mincop.reference_values import build_rows, rows_to_csv


def main() -> int:
    rows = build_rows(
        progress=lambda r: print(
            f"{'PASS' if r.passed else 'FAIL'}  {r.quantity} (d={r.d}): "
            f"{r.computed:.10g} vs {r.paper_value:.10g}, err {r.error:.2e}"
        )
    )
    csv = rows_to_csv(rows)
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w") as fh:
            fh.write(csv)
        print(f"wrote {sys.argv[1]}")
    failed = [r for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} rows passed")
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
