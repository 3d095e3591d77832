"""Counts, ratios, fits, averages and histograms over a finished scan store.

Everything here is a pure read-only function of the store; recomputation is
bit-identical.  Counts are exact integers; ratios of counts are returned as
exact fractions and only converted to float at the CSV boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import log, sqrt

import numpy as np

from .classnum import ClassStore, count_class, ratio_H
from .errors import DivisionByZero, DomainError, EmptySubset, InsufficientData
from .scan import KIND_ORDER, KIND_VANISHING, ResultStore

#: Fixed exponent of the conjectured growth law c * X^(5/6) * (log X)^d.
GROWTH_EXPONENT = 5.0 / 6.0

#: Validity policy for fit_powerlog: fits outside are reported as
#: InsufficientData rather than returned as numbers.
FIT_MAX_RMS_RESIDUAL = 0.25
FIT_MAX_ABS_D = 5.0


@dataclass(frozen=True)
class CountSeries:
    """Cumulative counts sampled on an ascending X grid."""

    grid: tuple[int, ...]
    counts: tuple[int, ...]


@dataclass
class Histogram:
    """Fixed-bin histogram Ix = [x, x+0.1), x in {-10.0, ..., 9.9}."""

    bin_start: float = -10.0
    bin_width: float = 0.1
    bin_count: int = 200
    counts: np.ndarray = field(default_factory=lambda: np.zeros(200, dtype=np.int64))
    underflow: int = 0
    overflow: int = 0
    n_samples: int = 0
    excluded: dict = field(default_factory=dict)

    def bin_left(self, i: int) -> float:
        return self.bin_start + i * self.bin_width

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow


def geometric_grid(bound: int, base: int = 1000) -> tuple[int, ...]:
    """X in {base * 2^i} capped at the scan bound, bound included."""
    if bound < 1:
        raise DomainError("empty grid: bound < 1")
    grid = []
    x = base
    while x < bound:
        grid.append(x)
        x *= 2
    grid.append(bound)
    return tuple(grid)


def _order_mask(store: ResultStore, x: int, primes_only: bool = False) -> np.ndarray:
    m = (store.m <= x) & store.kind_mask(KIND_ORDER)
    if primes_only:
        m &= store.prime
    return m


def count_sha(store: ResultStore, k: int, x: int) -> int:
    """f(k,X): cube-free m <= X with eps=+1 and |Sha| = k^2.  f(X) = f(1,X)."""
    store.require_range(x)
    return int((_order_mask(store, x) & (store.sha == k * k)).sum())


def count_vanishing(store: ResultStore, x: int, primes_only: bool = False) -> int:
    """g(X) (or g*(X) with primes_only): eps=+1 twists with L(E,1) = 0."""
    store.require_range(x)
    mask = (store.m <= x) & store.kind_mask(KIND_VANISHING)
    if primes_only:
        mask &= store.prime
    return int(mask.sum())


def count_eps_plus(store: ResultStore, x: int) -> int:
    store.require_range(x)
    return int(((store.m <= x) & (store.eps == 1)).sum())


def ratio_F(store: ResultStore, k: int, x: int) -> Fraction:
    """F(k,X) = f(X)/f(k,X) as an exact rational."""
    num = count_sha(store, 1, x)
    den = count_sha(store, k, x)
    if den == 0:
        raise DivisionByZero(f"f({k},{x}) = 0")
    return Fraction(num, den)


def watkins_reference(x: float) -> float:
    """(1/6) X^(5/6) (log X)^(-5/8), the prime-twist vanishing reference curve."""
    if x <= 1:
        raise DomainError(f"X={x} must exceed 1")
    return x**GROWTH_EXPONENT * log(x) ** (-0.625) / 6.0


def delaunay_average(store: ResultStore, t: int, subset: str = "all") -> float:
    """Mean of |Sha| over nonvanishing eps=+1 twists m <= T.

    subset = "primes" restricts to prime m (M*(T)); "all" gives N**(T).
    """
    if subset not in ("all", "primes"):
        raise DomainError(f"unknown subset {subset!r}")
    mask = _order_mask(store, t, primes_only=(subset == "primes"))
    if not mask.any():
        raise EmptySubset(f"no qualifying rows below T={t}")
    return float(store.sha[mask].mean())


def delaunay_normalized(store: ResultStore, t: int, subset: str = "all") -> float:
    """f(T) = M*(T)/sqrt(T) or g(T) = N**(T)/sqrt(T)."""
    return delaunay_average(store, t, subset) / sqrt(t)


def cl_predicted(p: int, terms: int | None = None) -> float:
    """f_0(p) = 1 - prod_{j>=1} (1 - p^(1-2j)), truncation error < 1e-9."""
    if terms is None:
        terms = 2
        while float(p) ** (1 - 2 * (terms + 1)) / (1.0 - p**-2) >= 1e-10:
            terms += 1
    if terms < 1:
        raise DomainError("terms must be >= 1")
    prod = 1.0
    for j in range(1, terms + 1):
        prod *= 1.0 - float(p) ** (1 - 2 * j)
    return 1.0 - prod


def divisibility_freq(store: ResultStore, p: int, x: int, primes_only: bool = False) -> float:
    """f_p(X) = F_p(X)/F(X): share of nonvanishing twists with p | |Sha|."""
    mask = _order_mask(store, x, primes_only)
    denom = int(mask.sum())
    if denom == 0:
        raise EmptySubset(f"F(X) = 0 at X={x}")
    numer = int((mask & (store.sha % p == 0)).sum())
    return numer / denom


_HIST_KINDS = ("logL", "sha_sqrt2", "sha_sqrt3")


def standardized_values(store: ResultStore, kind: str) -> tuple[np.ndarray, dict]:
    """Standardized samples (v + log log m / 2) / sqrt(log log m).

    v = log L(E_m,1) for kind "logL", log(|Sha|/m^(1/t)) for the sha kinds
    (t = 2, 3).  Rows with m < 3 are excluded (log log m <= 0), as are
    vanishing rows (log of zero); exclusions are reported in the meta dict.
    """
    if kind not in _HIST_KINDS:
        raise DomainError(f"unknown histogram kind {kind!r}")
    base = store.kind_mask(KIND_ORDER)
    meta = {
        "excluded_small_m": int((base & (store.m < 3)).sum()),
        "excluded_vanishing": int(store.kind_mask(KIND_VANISHING).sum()) if kind == "logL" else 0,
    }
    mask = base & (store.m >= 3)
    if not mask.any():
        raise EmptySubset("no qualifying rows")
    m = store.m[mask].astype(np.float64)
    if kind == "logL":
        v = np.log(store.L1[mask])
    elif kind == "sha_sqrt2":
        v = np.log(store.sha[mask].astype(np.float64)) - 0.5 * np.log(m)
    else:
        v = np.log(store.sha[mask].astype(np.float64)) - np.log(m) / 3.0
    ll = np.log(np.log(m))
    return (v + 0.5 * ll) / np.sqrt(ll), meta


def standardized_histogram(store: ResultStore, kind: str) -> Histogram:
    """Histogram of standardized values in bins [x, x+0.1), x in [-10, 10)."""
    values, meta = standardized_values(store, kind)
    hist = Histogram(excluded=meta, n_samples=len(values))
    idx = np.floor((values - hist.bin_start) / hist.bin_width).astype(np.int64)
    hist.underflow = int((idx < 0).sum())
    hist.overflow = int((idx >= hist.bin_count).sum())
    inside = idx[(idx >= 0) & (idx < hist.bin_count)]
    hist.counts = np.bincount(inside, minlength=hist.bin_count).astype(np.int64)
    return hist


def fit_powerlog(series: CountSeries) -> tuple[float, float]:
    """Least-squares (c, d) for count ~ c X^(5/6) (log X)^d, 5/6 fixed.

    Fits log(count) - (5/6) log X against log log X.  Degenerate inputs are
    rejected: fewer than 3 positive counts, RMS residual above 0.25, or
    |d| > 5 (a growth law this steep on a decade grid means the model does
    not describe the data, e.g. a constant series).
    """
    xs, ys = [], []
    for x, count in zip(series.grid, series.counts):
        if count > 0 and x > 1:
            xs.append(log(log(x)))
            ys.append(log(count) - GROWTH_EXPONENT * log(x))
    if len(xs) < 3:
        raise InsufficientData(f"need >= 3 positive grid points, have {len(xs)}")
    A = np.vstack([np.ones(len(xs)), np.array(xs)]).T
    coef, *_ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    intercept, d = float(coef[0]), float(coef[1])
    resid = np.array(ys) - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    if rms > FIT_MAX_RMS_RESIDUAL:
        raise InsufficientData(f"rms residual {rms:.3g} exceeds {FIT_MAX_RMS_RESIDUAL}")
    if abs(d) > FIT_MAX_ABS_D:
        raise InsufficientData(f"fitted exponent d={d:.3g} outside validity range")
    return float(np.exp(intercept)), d


def count_series(store: ResultStore, counter, grid=None) -> CountSeries:
    """Sample a cumulative counter over the (geometric) grid."""
    if grid is None:
        grid = geometric_grid(store.max_m)
    return CountSeries(tuple(grid), tuple(counter(x) for x in grid))


# ---------------------------------------------------------------------------
# Report emitters: one CSV-ready table per paper figure
# ---------------------------------------------------------------------------


def report_ratio_fg(store: ResultStore, grid=None):
    """f(X)/g(X) over the grid (rows with g(X) = 0 are skipped)."""
    if grid is None:
        grid = geometric_grid(store.max_m)
    rows = []
    for x in grid:
        g = count_vanishing(store, x)
        if g == 0:
            continue
        rows.append((x, count_sha(store, 1, x) / g))
    return "X,ratio", rows


def report_gstar_vs_watkins(store: ResultStore, grid=None):
    if grid is None:
        grid = geometric_grid(store.max_m)
    return "X,gstar,watkins", [
        (x, count_vanishing(store, x, primes_only=True), watkins_reference(x)) for x in grid
    ]


def report_g_normalized(store: ResultStore, grid=None, primes_only=False):
    if grid is None:
        grid = geometric_grid(store.max_m)
    # X^(5/6) (log X)^(-5/8) = 6 * watkins_reference(X)
    return "X,gnorm", [
        (x, count_vanishing(store, x, primes_only) / (6.0 * watkins_reference(x)))
        for x in grid
    ]


def report_Fkx(store: ResultStore, k: int, grid=None):
    if grid is None:
        grid = geometric_grid(store.max_m)
    rows = []
    for x in grid:
        try:
            rows.append((x, float(ratio_F(store, k, x))))
        except DivisionByZero:
            continue
    return "X,F", rows


def report_delaunay(store: ResultStore, grid=None):
    if grid is None:
        grid = geometric_grid(store.max_m)
    rows = []
    for t in grid:
        try:
            f = delaunay_normalized(store, t, "primes")
        except EmptySubset:
            f = float("nan")
        try:
            g = delaunay_normalized(store, t, "all")
        except EmptySubset:
            g = float("nan")
        rows.append((t, f, g))
    return "T,f,g", rows


def report_divisibility(store: ResultStore, p: int, grid=None, primes_only=False):
    if grid is None:
        grid = geometric_grid(store.max_m)
    rows = []
    for x in grid:
        try:
            rows.append((x, divisibility_freq(store, p, x, primes_only)))
        except EmptySubset:
            continue
    return "X,f_p", rows


def report_histogram(store: ResultStore, kind: str):
    hist = standardized_histogram(store, kind)
    rows = [(hist.bin_left(i), int(hist.counts[i])) for i in range(hist.bin_count)]
    return "bin_left,count", rows


def report_Hkx(cstore: ClassStore, k: int, grid=None):
    if grid is None:
        grid = geometric_grid(cstore.max_d)
    rows = []
    for x in grid:
        try:
            num, den = ratio_H(cstore, k, x)
        except DivisionByZero:
            continue
        rows.append((x, num / den))
    return "X,H", rows


def report_h1_normalized(cstore: ClassStore, grid=None):
    """h(1,X)/(X^(5/6) (log X)^r) for r = 0, 1."""
    if grid is None:
        grid = geometric_grid(cstore.max_d)
    rows = []
    for x in grid:
        h1 = count_class(cstore, 1, x)
        base = x**GROWTH_EXPONENT
        rows.append((x, h1 / base, h1 / (base * log(x))))
    return "X,h0,h1", rows
