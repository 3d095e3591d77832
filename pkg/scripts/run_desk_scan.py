#!/usr/bin/env python3
"""Run (or resume) the desk-scale twist scan and cache it under results/.

The X = 10^5 store backs the distribution-sanity checks; it takes a couple
of core-hours, so it is computed once and kept (gzipped) in the repository.
Usage:
    python scripts/run_desk_scan.py [--max 100000] [--threads 2]
"""

import argparse
import gzip
import os
import shutil
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cubicsha.scan import MANIFEST_NAME, RESULT_NAME, ScanConfig, resume, scan_range


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max", type=int, default=100_000)
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--chunk", type=int, default=512)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    root = os.path.join(os.path.dirname(__file__), "..")
    out = args.out or os.path.join(root, "results", f"desk_scan_{args.max}")
    ckpt = os.path.join(out, "checkpoints")
    cfg = ScanConfig(threads=args.threads, chunk_size=args.chunk,
                     out_dir=out, checkpoint_dir=ckpt)

    t0 = time.time()
    manifest = os.path.join(ckpt, MANIFEST_NAME)
    if os.path.exists(manifest):
        print(f"resuming from {manifest}")
        store = resume(manifest, cfg)
    else:
        store = scan_range(args.max, cfg)
    dt = time.time() - t0
    print(f"{store.n_rows} rows in {dt/60:.1f} min, quarantined={store.quarantined}")

    plain = os.path.join(out, RESULT_NAME)
    packed = plain + ".gz"
    with open(plain, "rb") as src, gzip.open(packed, "wb", compresslevel=9) as dst:
        shutil.copyfileobj(src, dst)
    print(f"cached store: {packed}")


if __name__ == "__main__":
    main()
