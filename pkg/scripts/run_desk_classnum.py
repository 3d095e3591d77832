#!/usr/bin/env python3
"""Run (or resume) the desk-scale class-number scan and cache it.

Usage:
    python scripts/run_desk_classnum.py [--max 100000] [--threads 2]
"""

import argparse
import gzip
import os
import shutil
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cubicsha.classnum import class_scan
from cubicsha.scan import MANIFEST_NAME, RESULT_NAME, ScanConfig, resume


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max", type=int, default=100_000)
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--chunk", type=int, default=2048)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    root = os.path.join(os.path.dirname(__file__), "..")
    out = args.out or os.path.join(root, "results", f"desk_classnum_{args.max}")
    ckpt = os.path.join(out, "checkpoints")
    cfg = ScanConfig(threads=args.threads, chunk_size=args.chunk,
                     out_dir=out, checkpoint_dir=ckpt)

    t0 = time.time()
    manifest = os.path.join(ckpt, MANIFEST_NAME)
    if os.path.exists(manifest):
        print(f"resuming from {manifest}")
        store = resume(manifest, cfg)
    else:
        store = class_scan(args.max, cfg)
    print(f"{store.n_rows} rows in {(time.time()-t0)/60:.1f} min")

    plain = os.path.join(out, RESULT_NAME)
    packed = plain + ".gz"
    with open(plain, "rb") as src, gzip.open(packed, "wb", compresslevel=9) as dst:
        shutil.copyfileobj(src, dst)
    print(f"cached store: {packed}")


if __name__ == "__main__":
    main()
