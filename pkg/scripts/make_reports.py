#!/usr/bin/env python3
"""Emit every report CSV from the cached desk-scale stores.

Usage:
    python scripts/make_reports.py [--out results/reports]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cubicsha.cli import main as cli_main

ROOT = os.path.join(os.path.dirname(__file__), "..")

TWIST_REPORTS = [
    ("ratio-fg", []),
    ("gstar-vs-watkins", []),
    ("g-normalized", []),
    ("Fkx", ["--k", "2"]),
    ("delaunay", []),
    ("divisibility", ["--p", "3"]),
    ("hist-logL", []),
    ("hist-sha2", []),
    ("hist-sha3", []),
]

CLASS_REPORTS = [
    ("Hkx", ["--k", "2"]),
    ("h1-normalized", []),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(ROOT, "results", "reports"))
    ap.add_argument("--twist-store",
                    default=os.path.join(ROOT, "results", "desk_scan_100000", "results.csv.gz"))
    ap.add_argument("--class-store",
                    default=os.path.join(ROOT, "results", "desk_classnum_100000", "results.csv.gz"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for report, extra in TWIST_REPORTS:
        if not os.path.exists(args.twist_store):
            print(f"skip {report}: missing {args.twist_store}")
            continue
        rc = cli_main(["stats", "--store", args.twist_store, "--report", report,
                       "--out", args.out] + extra)
        assert rc == 0, report
    for report, extra in CLASS_REPORTS:
        if not os.path.exists(args.class_store):
            print(f"skip {report}: missing {args.class_store}")
            continue
        rc = cli_main(["stats", "--store", args.class_store, "--report", report,
                       "--out", args.out] + extra)
        assert rc == 0, report


if __name__ == "__main__":
    main()
