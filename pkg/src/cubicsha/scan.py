"""Resumable parallel scans over cube-free twist parameters.

A scan is split into contiguous m-chunks; each finished chunk becomes an
immutable CSV shard plus a manifest line carrying its SHA-256.  Results are
a pure function of (m, tolerance policy), so the final store is identical
for any worker count or chunk size, and a resumed scan reproduces a fresh
one bit for bit.
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import io
import multiprocessing
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .curve import TwistCurve, build_curve, factorize
from .eisenstein import is_prime
from .errors import (
    AmbiguousSign,
    ManifestCorrupt,
    NotASquare,
    NotNearInteger,
    RangeNotCovered,
)
from .lseries import (
    CertifiedValue,
    DEFAULT_POLICY,
    PrimeCache,
    ROOT_TEST_T,
    TolerancePolicy,
    _decide_sign,
    _sums_at,
    coefficients,
    cutoff_for,
    sum_tolerance,
)
from .sha import certify, sha_analytic

RESULT_COLUMNS = "m,eps,conductor,L1,L1err,cfin,cinf,tm,kind,sha,prime,m9"

KIND_ORDER = "order"
KIND_VANISHING = "vanishing"
KIND_ODD = "odd"
KIND_QUARANTINE = "quarantine"

_KIND_CODE = {KIND_ORDER: 0, KIND_VANISHING: 1, KIND_ODD: 2, KIND_QUARANTINE: 3}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}

MANIFEST_NAME = "manifest.txt"
RESULT_NAME = "results.csv"


@dataclass(frozen=True)
class TwistResult:
    """One scan record; the row behind every statistic of the study."""

    m: int
    eps: int
    conductor: int
    L1: float | None
    L1_err: float | None
    cfin: int
    cinf: float
    tm: int
    kind: str
    sha: int
    is_prime_m: bool
    m_mod_9: int

    def csv_row(self) -> str:
        l1 = repr(float(self.L1)) if self.L1 is not None else ""
        l1e = repr(float(self.L1_err)) if self.L1_err is not None else ""
        return (
            f"{self.m},{self.eps},{self.conductor},{l1},{l1e},{self.cfin},"
            f"{float(self.cinf)!r},{self.tm},{self.kind},{self.sha},"
            f"{int(self.is_prime_m)},{self.m_mod_9}"
        )


@dataclass(frozen=True)
class ScanConfig:
    """Worker, chunking and output knobs for a scan."""

    threads: int = 1
    chunk_size: int = 1024
    out_dir: str = "."
    checkpoint_dir: str | None = None  # defaults to out_dir
    policy: TolerancePolicy = field(default_factory=lambda: DEFAULT_POLICY)

    def resolved_checkpoint(self) -> str:
        return self.checkpoint_dir or self.out_dir


def cubefree_mask(x: int) -> np.ndarray:
    """Boolean mask over 0..x, True at cube-free positive integers."""
    mask = np.ones(x + 1, dtype=bool)
    if x >= 0:
        mask[0] = False
    i = 2
    while i * i * i <= x:
        mask[i * i * i :: i * i * i] = False
        i += 1
    return mask


def cubefree_iter(x: int):
    """Ascending cube-free integers in [1, x]."""
    mask = cubefree_mask(x)
    return iter(np.nonzero(mask)[0].tolist())


def cubefree_count(x: int) -> int:
    return int(cubefree_mask(x).sum())


# ---------------------------------------------------------------------------
# Per-twist pipeline
# ---------------------------------------------------------------------------


def evaluate_twist(
    m: int,
    policy: TolerancePolicy = DEFAULT_POLICY,
    cache: PrimeCache | None = None,
    factors=None,
    prime_flag: bool | None = None,
) -> TwistResult:
    """Full pipeline for one cube-free m: curve data, sign, L-value, |Sha|.

    One coefficient table serves both the functional-equation sign test and
    the central value; ambiguity or a failed integer certification escalates
    the cutoff (doubling, at most policy.max_escalations times) before the
    row is quarantined.
    """
    if cache is None:
        cache = PrimeCache()
    if factors is None:
        factors = factorize(m)
    if prime_flag is None:
        prime_flag = is_prime(m)
    curve = build_curve(m, factors)
    sqrt_n = float(curve.conductor) ** 0.5
    tol = sum_tolerance(policy, curve.tamagawa_product, curve.period, curve.torsion_factor)
    t_min = 1.0 / max(ROOT_TEST_T)
    limit = int(cutoff_for(sqrt_n, t_min, tol) * policy.cutoff_scale)

    failure: Exception | None = None
    for _ in range(policy.max_escalations + 1):
        table = coefficients(m, limit, cache, factors)
        ts = [t for tt in ROOT_TEST_T for t in (tt, 1.0 / tt)] + [1.0]
        sums = _sums_at(table, sqrt_n, ts)
        try:
            eps = _decide_sign(sums)
        except AmbiguousSign as exc:
            failure = exc
            limit *= 2
            continue
        if eps == -1:
            return _row(m, curve, -1, None, None, KIND_ODD, 0, prime_flag)
        s1 = sums[1.0]
        L = CertifiedValue(2.0 * s1.value, 2.0 * s1.error_bound)
        S = sha_analytic(L, m, curve)
        try:
            outcome = certify(S, policy)
        except NotNearInteger as exc:
            failure = exc
            limit *= 2
            continue
        except NotASquare as exc:
            # a certified non-square order flags an anomaly or a convention
            # bug; more precision cannot change it, so quarantine loudly
            failure = exc
            break
        kind = KIND_ORDER if outcome.kind == "order" else KIND_VANISHING
        return _row(m, curve, 1, L.value, L.error_bound, kind, outcome.order, prime_flag)
    return _row(m, curve, 0, None, None, KIND_QUARANTINE, 0, prime_flag, note=failure)


def _row(m, curve: TwistCurve, eps, l1, l1e, kind, sha, prime_flag, note=None):
    return TwistResult(
        m=m,
        eps=eps,
        conductor=curve.conductor,
        L1=l1,
        L1_err=l1e,
        cfin=curve.tamagawa_product,
        cinf=curve.period,
        tm=curve.torsion_factor,
        kind=kind,
        sha=sha,
        is_prime_m=bool(prime_flag),
        m_mod_9=m % 9,
    )


# ---------------------------------------------------------------------------
# Chunked execution with manifest / resume
# ---------------------------------------------------------------------------

_worker_state: dict = {}


def _init_twist_worker(policy: TolerancePolicy, cache_bound: int):
    cache = PrimeCache()
    if cache_bound > 1:
        cache.ensure(cache_bound)
    _worker_state["policy"] = policy
    _worker_state["cache"] = cache


def _run_twist_chunk(args) -> tuple[int, str, int]:
    idx, start, end = args
    policy = _worker_state["policy"]
    cache = _worker_state["cache"]
    mask = cubefree_mask(end)
    lines = []
    quarantined = 0
    for m in range(start, end + 1):
        if not mask[m]:
            continue
        row = evaluate_twist(m, policy, cache)
        if row.kind == KIND_QUARANTINE:
            quarantined += 1
        lines.append(row.csv_row())
    text = "\n".join(lines)
    if text:
        text += "\n"
    return idx, text, quarantined


def _scan_cache_bound(x: int, policy: TolerancePolicy) -> int:
    """Worst-case coefficient cutoff over a scan up to x (sqrt(N) <= sqrt(27) x)."""
    if x < 1:
        return 0
    from .curve import _PERIOD_BASE

    sqrt_n = 27.0**0.5 * x
    cinf_min = _PERIOD_BASE / float(x) ** (1.0 / 3.0)
    tol = min(policy.l_tol, policy.certify_margin * policy.margin_fraction * cinf_min) / 2.0
    return int(cutoff_for(sqrt_n, 1.0 / max(ROOT_TEST_T), tol) * policy.cutoff_scale)


@dataclass
class ScanManifest:
    """Completed-chunk registry for a resumable scan."""

    kind: str
    maximum: int
    chunk_size: int
    policy_version: str
    columns: str
    chunks: dict[int, tuple[int, int, str]]  # idx -> (start, end, sha256)
    path: str

    @staticmethod
    def chunk_ranges(maximum: int, chunk_size: int) -> list[tuple[int, int, int]]:
        out = []
        idx = 0
        start = 1
        while start <= maximum:
            end = min(start + chunk_size - 1, maximum)
            out.append((idx, start, end))
            idx += 1
            start = end + 1
        return out

    def header_lines(self) -> list[str]:
        return [
            "# cubicsha manifest v1",
            f"kind={self.kind}",
            f"max={self.maximum}",
            f"chunk={self.chunk_size}",
            f"tol={self.policy_version}",
            f"columns={self.columns}",
        ]

    def write(self):
        tmp = self.path + ".tmp"
        with open(tmp, "w") as fh:
            for line in self.header_lines():
                fh.write(line + "\n")
            for idx in sorted(self.chunks):
                start, end, digest = self.chunks[idx]
                fh.write(f"{idx},{start},{end},{digest}\n")
        os.replace(tmp, self.path)

    @classmethod
    def load(cls, path: str) -> "ScanManifest":
        if not os.path.exists(path):
            raise ManifestCorrupt(f"manifest not found: {path}")
        meta = {}
        chunks = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" in line and "," not in line.split("=")[0]:
                    k, v = line.split("=", 1)
                    meta[k] = v
                    continue
                parts = line.split(",")
                if len(parts) != 4:
                    raise ManifestCorrupt(f"malformed manifest line: {line!r}")
                idx, start, end, digest = parts
                chunks[int(idx)] = (int(start), int(end), digest)
        try:
            return cls(
                kind=meta["kind"],
                maximum=int(meta["max"]),
                chunk_size=int(meta["chunk"]),
                policy_version=meta["tol"],
                columns=meta["columns"],
                chunks=chunks,
                path=path,
            )
        except KeyError as exc:
            raise ManifestCorrupt(f"manifest missing field {exc}") from exc


def _shard_path(checkpoint_dir: str, idx: int) -> str:
    return os.path.join(checkpoint_dir, f"shard_{idx:06d}.csv")


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _atomic_write(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _run_chunked(
    kind: str,
    maximum: int,
    config: ScanConfig,
    columns: str,
    worker_fn,
    init_fn,
    init_args: tuple,
    manifest: ScanManifest | None = None,
) -> str:
    """Drive chunk workers, persist shards + manifest, finalize the store.

    Returns the path of the finalized results CSV.  The parent process is
    the only writer; workers only compute.
    """
    ckpt = config.resolved_checkpoint()
    os.makedirs(ckpt, exist_ok=True)
    os.makedirs(config.out_dir, exist_ok=True)
    manifest_path = os.path.join(ckpt, MANIFEST_NAME)
    if manifest is None:
        manifest = ScanManifest(kind, maximum, config.chunk_size,
                                config.policy.fingerprint(), columns, {}, manifest_path)
    if manifest.policy_version != config.policy.fingerprint():
        raise ManifestCorrupt(
            f"manifest tolerance policy {manifest.policy_version!r} does not match "
            f"configured {config.policy.fingerprint()!r}"
        )
    ranges = ScanManifest.chunk_ranges(manifest.maximum, manifest.chunk_size)
    todo = [r for r in ranges if r[0] not in manifest.chunks]

    if todo:
        if config.threads <= 1:
            init_fn(*init_args)
            results = map(worker_fn, todo)
            for idx, text, _ in results:
                _finish_chunk(manifest, ckpt, idx, ranges[idx], text)
        else:
            with multiprocessing.Pool(config.threads, initializer=init_fn,
                                      initargs=init_args) as pool:
                for idx, text, _ in pool.imap_unordered(worker_fn, todo):
                    _finish_chunk(manifest, ckpt, idx, ranges[idx], text)

    # verify every shard against its manifest digest, then concatenate
    out_path = os.path.join(config.out_dir, RESULT_NAME)
    buf = io.StringIO()
    buf.write(columns + "\n")
    for idx, start, end in ranges:
        if idx not in manifest.chunks:
            raise ManifestCorrupt(f"chunk {idx} missing after run")
        _, _, digest = manifest.chunks[idx]
        shard = _shard_path(ckpt, idx)
        try:
            with open(shard) as fh:
                text = fh.read()
        except FileNotFoundError as exc:
            raise ManifestCorrupt(f"shard file missing for chunk {idx}") from exc
        if _digest(text) != digest:
            raise ManifestCorrupt(f"digest mismatch for chunk {idx}")
        buf.write(text)
    _atomic_write(out_path, buf.getvalue())
    return out_path


def _finish_chunk(manifest: ScanManifest, ckpt: str, idx: int, rng, text: str):
    _, start, end = rng
    _atomic_write(_shard_path(ckpt, idx), text)
    manifest.chunks[idx] = (start, end, _digest(text))
    manifest.write()


def scan_range(x: int, config: ScanConfig = ScanConfig()) -> "ResultStore":
    """One TwistResult per cube-free m <= x, persisted and returned."""
    bound = _scan_cache_bound(x, config.policy)
    path = _run_chunked(
        "scan", x, config, RESULT_COLUMNS,
        _run_twist_chunk, _init_twist_worker, (config.policy, bound),
    )
    return ResultStore.load(path)


def resume(manifest_path: str, config: ScanConfig = ScanConfig()) -> "ResultStore":
    """Complete an interrupted scan; the final store equals a fresh scan's.

    Completed chunks are trusted after digest verification, never recomputed.
    """
    manifest = ScanManifest.load(manifest_path)
    ckpt = os.path.dirname(os.path.abspath(manifest_path))
    config = replace(config, checkpoint_dir=ckpt)
    # verify digests of completed chunks before trusting them
    for idx, (start, end, digest) in manifest.chunks.items():
        shard = _shard_path(ckpt, idx)
        try:
            with open(shard) as fh:
                text = fh.read()
        except FileNotFoundError:
            raise ManifestCorrupt(f"shard file missing for completed chunk {idx}")
        if _digest(text) != digest:
            raise ManifestCorrupt(f"digest mismatch for chunk {idx}")
    if manifest.kind == "scan":
        bound = _scan_cache_bound(manifest.maximum, config.policy)
        path = _run_chunked(
            "scan", manifest.maximum, config, manifest.columns,
            _run_twist_chunk, _init_twist_worker, (config.policy, bound),
            manifest=manifest,
        )
        return ResultStore.load(path)
    if manifest.kind == "classnum":
        from .classnum import _init_class_worker, _run_class_chunk, CLASS_COLUMNS, ClassStore

        path = _run_chunked(
            "classnum", manifest.maximum, config, CLASS_COLUMNS,
            _run_class_chunk, _init_class_worker, (config.policy,),
            manifest=manifest,
        )
        return ClassStore.load(path)
    raise ManifestCorrupt(f"unknown manifest kind {manifest.kind!r}")


# ---------------------------------------------------------------------------
# Result store
# ---------------------------------------------------------------------------


class ResultStore:
    """Column-array view of a finished scan CSV."""

    def __init__(self, path: str, rows: list[dict]):
        self.path = path
        n = len(rows)
        self.m = np.array([r["m"] for r in rows], dtype=np.int64)
        self.eps = np.array([r["eps"] for r in rows], dtype=np.int8)
        self.conductor = np.array([r["conductor"] for r in rows], dtype=np.int64)
        self.L1 = np.array([r["L1"] for r in rows], dtype=np.float64)
        self.L1_err = np.array([r["L1err"] for r in rows], dtype=np.float64)
        self.cfin = np.array([r["cfin"] for r in rows], dtype=np.int64)
        self.cinf = np.array([r["cinf"] for r in rows], dtype=np.float64)
        self.tm = np.array([r["tm"] for r in rows], dtype=np.int8)
        self.kind = np.array([_KIND_CODE[r["kind"]] for r in rows], dtype=np.int8)
        self.sha = np.array([r["sha"] for r in rows], dtype=np.int64)
        self.prime = np.array([r["prime"] for r in rows], dtype=bool)
        self.m9 = np.array([r["m9"] for r in rows], dtype=np.int8)
        self.n_rows = n

    @property
    def max_m(self) -> int:
        return int(self.m.max()) if self.n_rows else 0

    @property
    def quarantined(self) -> int:
        return int((self.kind == _KIND_CODE[KIND_QUARANTINE]).sum())

    def require_range(self, x: int):
        if x > self.max_m:
            raise RangeNotCovered(f"store covers m <= {self.max_m}, requested {x}")

    def kind_mask(self, kind: str) -> np.ndarray:
        return self.kind == _KIND_CODE[kind]

    @classmethod
    def load(cls, path: str) -> "ResultStore":
        opener = gzip.open if path.endswith(".gz") else open
        rows = []
        with opener(path, "rt") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != RESULT_COLUMNS.split(","):
                raise ManifestCorrupt(f"unexpected result columns in {path}")
            for rec in reader:
                rows.append(
                    {
                        "m": int(rec["m"]),
                        "eps": int(rec["eps"]),
                        "conductor": int(rec["conductor"]),
                        "L1": float(rec["L1"]) if rec["L1"] else np.nan,
                        "L1err": float(rec["L1err"]) if rec["L1err"] else np.nan,
                        "cfin": int(rec["cfin"]),
                        "cinf": float(rec["cinf"]),
                        "tm": int(rec["tm"]),
                        "kind": rec["kind"],
                        "sha": int(rec["sha"]),
                        "prime": rec["prime"] == "1",
                        "m9": int(rec["m9"]),
                    }
                )
        return cls(path, rows)
