"""Command-line surface: twist / scan / resume / stats / classnum.

Exit codes: 0 success, 2 usage or domain error, 3 numerical escalation
failure, 4 I/O error.  All file output is atomic (temp + rename) and every
command is idempotent for identical inputs and config.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import classnum as classnum_mod
from . import scan as scan_mod
from . import stats as stats_mod
from .errors import (
    AmbiguousSign,
    CubicShaError,
    CutoffTooSmall,
    ManifestCorrupt,
    NotASquare,
    NotCubeFree,
    NotNearInteger,
    RoundingMarginFailed,
)
from .lseries import DEFAULT_POLICY
from .scan import ScanConfig

THREADS_ENV = "CUBICSHA_THREADS"

_DOMAIN_ERRORS = (NotCubeFree,)
_NUMERIC_ERRORS = (AmbiguousSign, NotNearInteger, NotASquare, CutoffTooSmall,
                   RoundingMarginFailed)


def _threads(args) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, args.threads)


def _config(args) -> ScanConfig:
    policy = DEFAULT_POLICY
    if getattr(args, "tol", None) is not None:
        policy = replace(policy, l_tol=args.tol)
    if getattr(args, "cutoff_scale", None) is not None:
        policy = replace(policy, cutoff_scale=args.cutoff_scale)
    return ScanConfig(
        threads=_threads(args),
        chunk_size=args.chunk,
        out_dir=args.out,
        checkpoint_dir=args.checkpoint,
        policy=policy,
    )


def _write_csv(path: str, header: str, rows) -> None:
    text = header + "\n" + "\n".join(",".join(_fmt(v) for v in row) for row in rows)
    if rows:
        text += "\n"
    scan_mod._atomic_write(path, text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_twist(args) -> int:
    row = scan_mod.evaluate_twist(args.m, policy=_config(args).policy)
    if row.kind == scan_mod.KIND_QUARANTINE:
        print(f"m={args.m}: sign/certification did not stabilize after escalation",
              file=sys.stderr)
        return 3
    print(scan_mod.RESULT_COLUMNS)
    print(row.csv_row())
    return 0


def cmd_scan(args) -> int:
    cfg = _config(args)
    store = scan_mod.scan_range(args.max, cfg)
    print(f"scan complete: {store.n_rows} rows, {store.quarantined} quarantined -> "
          f"{os.path.join(cfg.out_dir, scan_mod.RESULT_NAME)}")
    return 0


def cmd_resume(args) -> int:
    cfg = _config(args)
    manifest = args.manifest
    if os.path.isdir(manifest):
        manifest = os.path.join(manifest, scan_mod.MANIFEST_NAME)
    store = scan_mod.resume(manifest, cfg)
    print(f"resume complete: {store.n_rows} rows -> "
          f"{os.path.join(cfg.out_dir, scan_mod.RESULT_NAME)}")
    return 0


_REPORTS = {
    "ratio-fg": lambda s, a: stats_mod.report_ratio_fg(s),
    "gstar-vs-watkins": lambda s, a: stats_mod.report_gstar_vs_watkins(s),
    "g-normalized": lambda s, a: stats_mod.report_g_normalized(s, primes_only=a.primes_only),
    "Fkx": lambda s, a: stats_mod.report_Fkx(s, a.k),
    "delaunay": lambda s, a: stats_mod.report_delaunay(s),
    "divisibility": lambda s, a: stats_mod.report_divisibility(s, a.p, primes_only=a.primes_only),
    "hist-logL": lambda s, a: stats_mod.report_histogram(s, "logL"),
    "hist-sha2": lambda s, a: stats_mod.report_histogram(s, "sha_sqrt2"),
    "hist-sha3": lambda s, a: stats_mod.report_histogram(s, "sha_sqrt3"),
}

_CLASS_REPORTS = {
    "Hkx": lambda s, a: stats_mod.report_Hkx(s, a.k),
    "h1-normalized": lambda s, a: stats_mod.report_h1_normalized(s),
}


def cmd_stats(args) -> int:
    if args.report in _REPORTS:
        store = scan_mod.ResultStore.load(args.store)
        header, rows = _REPORTS[args.report](store, args)
    elif args.report in _CLASS_REPORTS:
        store = classnum_mod.ClassStore.load(args.store)
        header, rows = _CLASS_REPORTS[args.report](store, args)
    else:
        print(f"unknown report {args.report!r}; choose from "
              f"{sorted(_REPORTS) + sorted(_CLASS_REPORTS)}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.report}.csv")
    _write_csv(path, header, rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_classnum(args) -> int:
    cfg = _config(args)
    store = classnum_mod.class_scan(args.max, cfg)
    print(f"classnum complete: {store.n_rows} rows -> "
          f"{os.path.join(cfg.out_dir, scan_mod.RESULT_NAME)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicsha",
                                 description="Analytic Sha orders for cubic twists "
                                             "x^3 + y^3 = m, scans and statistics")
    sub = ap.add_subparsers(dest="command", required=True)

    def common_scan_flags(p):
        p.add_argument("--threads", type=int, default=1,
                       help=f"worker count (env {THREADS_ENV} overrides)")
        p.add_argument("--chunk", type=int, default=1024, help="chunk size in m")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--checkpoint", default=None, help="checkpoint directory")
        p.add_argument("--tol", type=float, default=None, help="L-value tolerance override")
        p.add_argument("--cutoff-scale", type=float, default=None,
                       help="multiply every series cutoff (certification re-runs)")

    p = sub.add_parser("twist", help="evaluate a single twist")
    p.add_argument("m", type=int)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--cutoff-scale", type=float, default=None)
    p.set_defaults(fn=cmd_twist, threads=1, chunk=1024, out=".", checkpoint=None)

    p = sub.add_parser("scan", help="scan all cube-free m <= max")
    p.add_argument("--max", type=int, required=True)
    common_scan_flags(p)
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("resume", help="finish an interrupted scan from its manifest")
    p.add_argument("--manifest", required=True,
                   help="manifest file or checkpoint directory")
    common_scan_flags(p)
    p.set_defaults(fn=cmd_resume)

    p = sub.add_parser("stats", help="emit a plot-ready CSV data series")
    p.add_argument("--store", required=True, help="results.csv from scan/classnum")
    p.add_argument("--report", required=True,
                   help=", ".join(sorted(_REPORTS) + sorted(_CLASS_REPORTS)))
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--primes-only", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("classnum", help="real quadratic class numbers d <= max")
    p.add_argument("--max", type=int, required=True)
    common_scan_flags(p)
    p.set_defaults(fn=cmd_classnum)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ManifestCorrupt, OSError) as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4
    except CubicShaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
