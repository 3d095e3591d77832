"""Twisted L-series coefficients and certified central values.

The coefficient a_p at a split prime p = 1 (mod 3) is a twisted trace of
the primary prime pi above p: with 4p = L^2 + 27M^2 the three candidate
traces are -L, (L-9M)/2, (L+9M)/2, selected by the cubic character of m
mod pi.  The convention (conjugate character) is pinned by the point-count
oracle in the test suite.

All per-prime CM data (L, M, cube root of unity mod p) depends only on p
and is cached across twists; only the character index depends on m.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, exp, isqrt, log, pi as PI

import numpy as np

from .curve import build_curve, factorize
from .eisenstein import cornacchia_4p, is_prime, sqrt_mod
from .errors import AmbiguousSign, BadPrime, CutoffTooSmall, OddSign

#: t-values of the functional-equation consistency test.
ROOT_TEST_T = (1.1, 1.3)

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class CertifiedValue:
    """A real value with a rigorous absolute error bound."""

    value: float
    error_bound: float

    def interval(self) -> tuple[float, float]:
        return self.value - self.error_bound, self.value + self.error_bound


@dataclass(frozen=True)
class TolerancePolicy:
    """Precision policy driving cutoffs and certification margins."""

    version: str = "v1"
    l_tol: float = 1e-4  # absolute cap on the certified L-error
    certify_margin: float = 0.01  # delta = margin * max(1, n) in certify()
    margin_fraction: float = 0.25  # share of delta granted to truncation
    cutoff_scale: float = 1.0  # >1 re-runs everything at a larger cutoff
    max_escalations: int = 2

    def fingerprint(self) -> str:
        """Identity of everything that can change scan output."""
        return (f"{self.version};ltol={self.l_tol!r};margin={self.certify_margin!r};"
                f"frac={self.margin_fraction!r};scale={self.cutoff_scale!r};"
                f"esc={self.max_escalations}")


DEFAULT_POLICY = TolerancePolicy()


@dataclass
class CoefficientTable:
    """a_m(n) for n <= limit; values are exact integers in float64."""

    m: int
    limit: int
    values: np.ndarray

    def integer_values(self) -> np.ndarray:
        return self.values.astype(np.int64)


def _sieve_primes(bound: int) -> np.ndarray:
    if bound < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(bound + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(bound**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def _powmod_vec(base: np.ndarray, expo: np.ndarray, mod: np.ndarray) -> np.ndarray:
    """Vectorized modular exponentiation on int64 arrays (mod < 3e9)."""
    result = np.ones_like(mod)
    b = base % mod
    e = expo.copy()
    while (e > 0).any():
        odd = (e & 1) == 1
        np.copyto(result, result * b % mod, where=odd)
        e >>= 1
        b = b * b % mod
    return result


class PrimeCache:
    """Shared split-prime data: Cornacchia pair, traces, cube root of unity.

    Read-mostly: `ensure` extends the tables monotonically; all other
    methods only read.  Each scan worker owns one instance.
    """

    def __init__(self):
        self.bound = 0
        self.primes = np.empty(0, dtype=np.int64)
        self._split_list: list[tuple[int, int, int, int]] = []  # (p, L, M, z)
        self.split = np.empty(0, dtype=np.int64)
        self.z = np.empty(0, dtype=np.int64)
        self.ap3 = np.empty((0, 3), dtype=np.int64)

    def ensure(self, bound: int) -> None:
        if bound <= self.bound:
            return
        bound = max(bound, 2 * self.bound, 1024)
        assert bound < 3_000_000_000, "int64 modpow budget exceeded"
        self.primes = _sieve_primes(bound)
        new_split = self.primes[(self.primes % 3 == 1) & (self.primes > self.bound)]
        for p in new_split.tolist():
            L, M = _cornacchia_raw(p)
            a, b = (L + 3 * M) // 2, 3 * M
            z = (-a * pow(b, -1, p)) % p
            self._split_list.append((p, L, M, z))
        self.bound = bound
        n = len(self._split_list)
        arr = np.array(self._split_list, dtype=np.int64).reshape(n, 4)
        self.split = arr[:, 0].copy()
        Ls, Ms = arr[:, 1], arr[:, 2]
        self.z = arr[:, 3].copy()
        ap3 = np.empty((n, 3), dtype=np.int64)
        ap3[:, 0] = -Ls
        ap3[:, 1] = (Ls - 9 * Ms) // 2
        ap3[:, 2] = (Ls + 9 * Ms) // 2
        self.ap3 = ap3

    def split_ap(self, m: int, limit: int) -> tuple[np.ndarray, np.ndarray]:
        """(primes, a_p) for split primes <= limit not dividing m."""
        self.ensure(limit)
        k = int(np.searchsorted(self.split, limit, side="right"))
        ps = self.split[:k]
        z = self.z[:k]
        mred = np.full(k, m, dtype=np.int64) % ps
        s = _powmod_vec(mred, (ps - 1) // 3, ps)
        j = np.zeros(k, dtype=np.int64)
        j[s == z] = 1
        j[s == z * z % ps] = 2
        ap = self.ap3[np.arange(k), j]
        good = mred != 0
        return ps[good], ap[good]


def _cornacchia_raw(p: int) -> tuple[int, int]:
    """cornacchia_4p without the primality re-check (p from a sieve)."""
    x0 = sqrt_mod(-27 % p, p)
    if x0 % 2 != 1:
        x0 = p - x0
    a, b = 2 * p, x0
    limit = isqrt(4 * p)
    while b > limit:
        a, b = b, a % b
    M2 = (4 * p - b * b) // 27
    M = isqrt(M2)
    assert M * M == M2, f"Cornacchia descent failed at p={p}"
    L = b if b % 3 == 1 else -b
    return L, M


def ap_good(m: int, p: int) -> int:
    """Coefficient a_p of E_m at a good prime p (not dividing 3m)."""
    if p % 3 == 0 or m % p == 0 or not is_prime(p):
        raise BadPrime(f"p={p} is not a good prime for m={m}")
    if p % 3 == 2:
        return 0
    L, M = cornacchia_4p(p)
    a, b = (L + 3 * M) // 2, 3 * M
    z = (-a * pow(b, -1, p)) % p
    s = pow(m % p, (p - 1) // 3, p)
    if s == 1:
        j = 0
    elif s == z:
        j = 1
    else:
        j = 2
    return (-L, (L - 9 * M) // 2, (L + 9 * M) // 2)[j]


def coefficients(m: int, limit: int, cache: PrimeCache | None = None,
                 factors=None) -> CoefficientTable:
    """a_m(n) for all n <= limit via a multiplicative prime-by-prime fill.

    Good split primes carry the twisted trace; good inert primes contribute
    only at even powers (a(p^2j) = (-p)^j); bad primes contribute nothing.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if cache is None:
        cache = PrimeCache()
    cache.ensure(limit)
    a = np.zeros(limit + 1)
    a[1] = 1.0
    if limit == 1:
        return CoefficientTable(m, limit, a)

    if factors is None:
        factors = factorize(m)
    bad = {3}
    bad.update(p for p, _ in factors)
    sqrt_limit = isqrt(limit)

    split_ps, split_ap = cache.split_ap(m, limit)
    split_ps_l = split_ps.tolist()
    split_ap_l = split_ap.tolist()

    # threshold between per-prime slice updates and the j-major batch
    small_cut = max(limit // 64, sqrt_limit, 64)

    # inert good primes: only even powers matter, so only p <= sqrt(limit)
    n_inert = int(np.searchsorted(cache.primes, sqrt_limit, side="right"))
    for p in cache.primes[:n_inert].tolist():
        if p % 3 != 2 or p in bad:
            continue
        base = a[: limit // (p * p) + 1].copy()
        q, coef = p * p, float(-p)
        while q <= limit:
            a[q::q] += coef * base[1 : limit // q + 1]
            q *= p * p
            coef *= float(-p)

    # split primes up to small_cut: per-prime updates with Hecke powers
    n_small = int(np.searchsorted(split_ps, small_cut, side="right"))
    for i in range(n_small):
        p = split_ps_l[i]
        ap = float(split_ap_l[i])
        if p * p > limit:
            a[p::p] += ap * a[1 : limit // p + 1]
            continue
        base = a[: limit // p + 1].copy()
        q, prev2, prev1 = p, 1.0, ap
        while q <= limit:
            a[q::q] += prev1 * base[1 : limit // q + 1]
            q *= p
            prev2, prev1 = prev1, prev1 * ap - p * prev2

    # large split primes: group by multiplier j (a[j] is already final)
    if n_small < len(split_ps_l):
        bigs = split_ps[n_small:]
        baps = split_ap[n_small:].astype(np.float64)
        jmax = limit // (small_cut + 1)
        for j in range(1, jmax + 1):
            i = int(np.searchsorted(bigs, limit // j, side="right"))
            if i == 0:
                break
            a[j * bigs[:i]] += a[j] * baps[:i]
    return CoefficientTable(m, limit, a)


def tail_bound(limit: int, sqrt_n: float, t: float) -> float:
    """Rigorous bound on sum_{n>limit} d(n) sqrt(n)/n e^{-2 pi n t / sqrt(N)}.

    Uses d(n) <= 2 sqrt(n) and the geometric series.
    """
    c = 2.0 * PI * t / sqrt_n
    r = exp(-c)
    return 2.0 * r ** (limit + 1) / (1.0 - r)


def cutoff_for(sqrt_n: float, t_min: float, tol: float) -> int:
    """Smallest cutoff M with tail_bound(M) < tol at the slowest t."""
    c = 2.0 * PI * t_min / sqrt_n
    r = exp(-c)
    m = ceil(log(2.0 / (tol * (1.0 - r))) / c)
    return max(int(m), 16)


_WEIGHT_BLOCK = 1 << 16


def _weights(c: float, limit: int) -> np.ndarray:
    """w[i] = exp(-c (i+1)) for i < limit, by anchored cumulative products.

    Exact exponentials seed every block of 2^16 terms; within a block the
    weight is extended by one multiplication per term, capping the relative
    drift at ~2^16 eps (folded into the rounding bound downstream).
    """
    w = np.empty(limit)
    r = exp(-c)
    for b0 in range(1, limit + 1, _WEIGHT_BLOCK):
        b1 = min(b0 + _WEIGHT_BLOCK, limit + 1)
        seg = np.full(b1 - b0, r)
        seg[0] = exp(-c * b0)
        np.cumprod(seg, out=seg)
        w[b0 - 1 : b1 - 1] = seg
    return w


def _sums_at(table: CoefficientTable, sqrt_n: float, ts) -> dict[float, CertifiedValue]:
    """S(t) for each t, with certified truncation + rounding bounds."""
    limit = table.limit
    n = np.arange(1, limit + 1, dtype=np.float64)
    an_over_n = table.values[1:] / n
    abs_terms = np.abs(an_over_n)
    # weight drift + pairwise-summation rounding, relative to sum |a_n/n| w;
    # the constant 52 >= log2(M) + 4 for any realizable cutoff, keeping the
    # bound monotone in M (the tail strictly dominates its own decrease)
    log_factor = _EPS * (_WEIGHT_BLOCK + 52.0)
    abs_dot_min = None
    out = {}
    for t in sorted(ts):
        w = _weights(2.0 * PI * t / sqrt_n, limit)
        s = float(an_over_n @ w)
        if abs_dot_min is None:
            # weights decrease in t: the smallest-t bound dominates the rest
            abs_dot_min = float(abs_terms @ w)
        # the 1e-290 cushion covers weight disagreements in the underflow range
        rounding = abs_dot_min * log_factor + 1e-290
        out[t] = CertifiedValue(s, tail_bound(limit, sqrt_n, t) + rounding)
    return out


def series_sum(m: int, t: float, table: CoefficientTable, tol: float | None = None,
               sqrt_n: float | None = None) -> CertifiedValue:
    """Certified S(t) = sum a_m(n)/n e^{-2 pi n t / sqrt(N)} from a table."""
    if table.m != m:
        raise ValueError(f"table built for m={table.m}, not m={m}")
    if sqrt_n is None:
        sqrt_n = float(build_curve(m).conductor) ** 0.5
    out = _sums_at(table, sqrt_n, (t,))[t]
    if tol is not None and out.error_bound > tol:
        raise CutoffTooSmall(
            f"certified bound {out.error_bound:.3g} exceeds tolerance {tol:.3g} at M={table.limit}"
        )
    return out


def sum_tolerance(policy: TolerancePolicy, cfin: int, cinf: float, tm: int) -> float:
    """Per-sum absolute tolerance implied by the certification margin."""
    sha_budget = policy.certify_margin * policy.margin_fraction
    return min(policy.l_tol, sha_budget * cfin * cinf / tm) / 2.0


def _decide_sign(sums: dict[float, CertifiedValue]) -> int:
    d_minus = max(abs(sums[t].value - sums[1.0 / t].value) for t in ROOT_TEST_T)
    t1, t2 = ROOT_TEST_T
    d_plus = abs(
        (sums[t1].value + sums[1.0 / t1].value) - (sums[t2].value + sums[1.0 / t2].value)
    )
    err = max(cv.error_bound for cv in sums.values())
    tol = 4.0 * err + 1e-15
    plus_ok = d_plus <= tol and 10.0 * d_plus <= d_minus
    minus_ok = d_minus <= tol and 10.0 * d_minus <= d_plus
    if plus_ok and not minus_ok:
        return 1
    if minus_ok and not plus_ok:
        return -1
    raise AmbiguousSign(
        f"functional-equation defects do not separate: even={d_plus:.3g} odd={d_minus:.3g} tol={tol:.3g}"
    )


def root_number(m: int, policy: TolerancePolicy = DEFAULT_POLICY,
                cache: PrimeCache | None = None) -> int:
    """Sign of the functional equation, by numeric consistency at two t."""
    curve = build_curve(m)
    sqrt_n = float(curve.conductor) ** 0.5
    tol = sum_tolerance(policy, curve.tamagawa_product, curve.period, curve.torsion_factor)
    t_min = 1.0 / max(ROOT_TEST_T)
    limit = int(cutoff_for(sqrt_n, t_min, tol) * policy.cutoff_scale)
    last = None
    for _ in range(policy.max_escalations + 1):
        table = coefficients(m, limit, cache)
        ts = [t for tt in ROOT_TEST_T for t in (tt, 1.0 / tt)]
        sums = _sums_at(table, sqrt_n, ts)
        try:
            return _decide_sign(sums)
        except AmbiguousSign as exc:
            last = exc
            limit *= 2
    raise last


def central_value(m: int, policy: TolerancePolicy = DEFAULT_POLICY,
                  cache: PrimeCache | None = None) -> CertifiedValue:
    """L(E_m, 1) = 2 S(1) with certified error, for root number +1."""
    curve = build_curve(m)
    sqrt_n = float(curve.conductor) ** 0.5
    if root_number(m, policy, cache) != 1:
        raise OddSign(f"root number of m={m} is -1")
    tol = sum_tolerance(policy, curve.tamagawa_product, curve.period, curve.torsion_factor)
    limit = int(cutoff_for(sqrt_n, 1.0, tol) * policy.cutoff_scale)
    table = coefficients(m, limit, cache)
    s = series_sum(m, 1.0, table, tol=tol, sqrt_n=sqrt_n)
    return CertifiedValue(2.0 * s.value, 2.0 * s.error_bound)
