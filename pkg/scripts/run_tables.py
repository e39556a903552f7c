#!/usr/bin/env python3
"""Recompute the golden stability tables into results/.

Usage: python scripts/run_tables.py [T1 T2 ...] [--jobs N] [--outdir DIR]
Defaults to all four tables at their standard n ranges.
"""
import argparse
import sys
import time
from pathlib import Path

from mixedstab.cli import RunConfig
from mixedstab.stability import reproduce_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("tables", nargs="*", default=["T1", "T2", "T3", "T4"],
                    help="which tables (default: all)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tables = args.tables or ["T1", "T2", "T3", "T4"]
    for which in tables:
        t0 = time.time()
        table = reproduce_table(which, jobs=args.jobs)
        cfg = RunConfig(command="tables", which=which.upper(),
                        threshold=table.threshold, fmt="csv", jobs=args.jobs)
        path = outdir / f"{which.lower()}.csv"
        path.write_text(cfg.provenance_line() + "\n" + table.to_csv())
        print(f"{which}: {len(table.rows)} rows -> {path} "
              f"({time.time() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
