"""Class numbers of real quadratic fields Q(sqrt(d)) by the analytic formula.

h(d) = sqrt(D) L(1, chi_D) / (2 R), with the regulator R from the continued
fraction of (D mod 2 + sqrt(D))/2 and L(1, chi_D) from the exact finite
log-sin sum.  The rounding distance to the nearest integer must stay below
0.25; one escalation recomputes the character sum with compensated
summation before giving up.

A reduced-forms cycle count serves as the exact test oracle, with the
narrow-to-wide correction read off the continued-fraction period parity.
"""

from __future__ import annotations

import csv
import gzip
from dataclasses import dataclass
from math import isqrt, log, pi, sqrt, fsum

import numpy as np

from .errors import (
    DivisionByZero,
    NotSquareFree,
    RangeNotCovered,
    RoundingMarginFailed,
)

CLASS_COLUMNS = "d,D,regulator,L1,h"

_ROUNDING_MARGIN = 0.25


def squarefree_mask(x: int) -> np.ndarray:
    mask = np.ones(x + 1, dtype=bool)
    if x >= 0:
        mask[0] = False
    i = 2
    while i * i <= x:
        mask[i * i :: i * i] = False
        i += 1
    return mask


def is_square_free(d: int) -> bool:
    if d < 1:
        return False
    i = 2
    while i * i <= d:
        if d % (i * i) == 0:
            return False
        i += 1
    return True


def fundamental_discriminant(d: int) -> int:
    """D = d if d == 1 (mod 4) else 4d, for square-free d > 1."""
    if d <= 1 or not is_square_free(d):
        raise NotSquareFree(f"d={d} is not a square-free integer > 1")
    return d if d % 4 == 1 else 4 * d


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n), built from quadratic reciprocity."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        return (-1 if a < 0 else 1) * kronecker_symbol(a, -n)
    # strip factors of 2 from n
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    a %= n
    # Jacobi symbol loop (n odd > 1)
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# ---------------------------------------------------------------------------
# Regulator via continued fractions
# ---------------------------------------------------------------------------


def _cf_cycle(D: int):
    """States (P_i, Q_i) and the cycle window of the CF of (P0 + sqrt(D))/Q0.

    P0 = D mod 2, Q0 = 2: the expansion of sqrt(D/4) when 4 | D and of
    (1 + sqrt(D))/2 when D == 1 (mod 4).  Returns (states, cycle_start).
    """
    sq = isqrt(D)
    P, Q = D % 2, 2
    seen = {}
    states = []
    i = 0
    while (P, Q) not in seen:
        seen[(P, Q)] = i
        states.append((P, Q))
        a = (P + sq) // Q
        P2 = a * Q - P
        Q2 = (D - P2 * P2) // Q
        P, Q = P2, Q2
        i += 1
    return states, seen[(P, Q)]


def regulator(D: int) -> float:
    """log of the fundamental unit of the order of discriminant D > 0.

    The unit is the product of the complete quotients (P_i + sqrt(D))/Q_i
    over one period; only the logarithms are accumulated, so the unit
    itself (often astronomically large) is never materialized.
    """
    if D <= 0 or D % 4 not in (0, 1):
        raise NotSquareFree(f"D={D} is not a positive discriminant")
    states, start = _cf_cycle(D)
    sq = sqrt(D)
    return fsum(log((p + sq) / q) for p, q in states[start:])


def unit_norm(D: int) -> int:
    """Norm (+1 or -1) of the fundamental unit: CF cycle parity."""
    states, start = _cf_cycle(D)
    period = len(states) - start
    return -1 if period % 2 == 1 else 1


def cf_period(D: int) -> int:
    states, start = _cf_cycle(D)
    return len(states) - start


# ---------------------------------------------------------------------------
# Dirichlet L(1, chi_D)
# ---------------------------------------------------------------------------


def _chi_values(D: int) -> np.ndarray:
    """chi_D(a) for a = 0..D-1 via the prime-discriminant decomposition.

    D factors uniquely into prime discriminants (-4, +-8 and
    q* = (-1)^((q-1)/2) q for odd primes q | D) and chi_D is the product of
    their characters: Legendre-symbol tables for the odd components, the
    mod-4/mod-8 patterns for the 2-part.
    """
    a = np.arange(D, dtype=np.int64)
    chi = np.ones(D, dtype=np.int8)
    d_odd = D
    while d_odd % 2 == 0:
        d_odd //= 2
    two_sign = 1  # sign of the product of odd prime discriminants
    q = 3
    n = d_odd
    while q * q <= n:
        if n % q == 0:
            n //= q
            if q % 4 == 3:
                two_sign = -two_sign
            chi *= _legendre_table(q)[a % q]
        q += 2
    if n > 1:
        if n % 4 == 3:
            two_sign = -two_sign
        chi *= _legendre_table(n)[a % n]
    # remaining component: D / (two_sign * d_odd) must be 1, -4, 8 or -8
    two_part = (D // d_odd) * two_sign
    if two_part == 1:
        pass
    elif two_part == -4:
        r = a & 3
        chi *= np.where(r == 1, 1, np.where(r == 3, -1, 0)).astype(np.int8)
    elif two_part == 8:
        r = a & 7
        chi *= np.where((r == 1) | (r == 7), 1,
                        np.where((r == 3) | (r == 5), -1, 0)).astype(np.int8)
    elif two_part == -8:
        r = a & 7
        chi *= np.where((r == 1) | (r == 3), 1,
                        np.where((r == 5) | (r == 7), -1, 0)).astype(np.int8)
    else:
        raise AssertionError(f"D={D}: 2-part {two_part} is not a prime discriminant")
    return chi


def _legendre_table(q: int) -> np.ndarray:
    table = np.full(q, -1, dtype=np.int8)
    table[0] = 0
    table[(np.arange(1, q, dtype=np.int64) ** 2) % q] = 1
    return table


def dirichlet_L1(D: int, compensated: bool = False) -> float:
    """L(1, chi_D) = -(1/sqrt(D)) sum_a chi_D(a) log sin(pi a / D).

    Exact finite evaluation; chi_D is even, so the sum is folded onto
    a < D/2 (the midpoint term vanishes: chi(D/2) = 0 or log sin = 0).
    """
    if D <= 1 or D % 4 not in (0, 1):
        raise NotSquareFree(f"D={D} is not a positive discriminant")
    chi = _chi_values(D)
    half = (D - 1) // 2
    a = np.arange(1, half + 1, dtype=np.float64)
    logsin = np.log(np.sin(pi / D * a))
    terms = chi[1 : half + 1].astype(np.float64) * logsin
    total = 2.0 * (fsum(terms.tolist()) if compensated else float(terms.sum()))
    return -total / sqrt(D)


@dataclass(frozen=True)
class ClassNumberRecord:
    d: int
    D: int
    regulator: float
    L1: float
    h: int


def class_number(d: int) -> ClassNumberRecord:
    """Certified h(d) = round(sqrt(D) L1 / (2R)) with margin < 0.25."""
    D = fundamental_discriminant(d)
    reg = regulator(D)
    L1 = dirichlet_L1(D)
    raw = sqrt(D) * L1 / (2.0 * reg)
    h = int(round(raw))
    if abs(raw - h) >= _ROUNDING_MARGIN:
        L1 = dirichlet_L1(D, compensated=True)
        raw = sqrt(D) * L1 / (2.0 * reg)
        h = int(round(raw))
        if abs(raw - h) >= _ROUNDING_MARGIN:
            raise RoundingMarginFailed(
                f"d={d}: h estimate {raw!r} too far from an integer after escalation"
            )
    return ClassNumberRecord(d, D, reg, L1, h)


# ---------------------------------------------------------------------------
# Reduced-forms oracle (test-side, exact)
# ---------------------------------------------------------------------------


def narrow_class_number_forms(D: int) -> int:
    """Number of cycles of reduced primitive indefinite forms of disc D.

    A form (a,b,c), b^2 - 4ac = D, is reduced iff 0 < (sqrt(D)-b)/2 < |a|
    < (sqrt(D)+b)/2.  Cycles under the rho operator partition the reduced
    forms; their count is the narrow class number h+.
    """
    from math import gcd

    sq = isqrt(D)
    reduced = set()
    for b in range(1, sq + 1):
        if (b - D) % 2 != 0:
            continue
        ac = (b * b - D) // 4  # negative
        if ac >= 0:
            continue
        n = -ac
        for a in range(1, isqrt(n) + 1):
            if n % a != 0:
                continue
            c = -(n // a)
            for aa, cc in ((a, c), (c, a), (-a, -c), (-c, -a)):
                if gcd(gcd(abs(aa), b), abs(cc)) != 1:
                    continue
                if _is_reduced(aa, b, cc, D, sq):
                    reduced.add((aa, b, cc))
    cycles = 0
    remaining = set(reduced)
    while remaining:
        cycles += 1
        f = next(iter(remaining))
        g = f
        while True:
            g = _rho(g, D, sq)
            remaining.discard(g)
            if g == f:
                break
    return cycles


def _is_reduced(a, b, c, D, sq):
    # reduced indefinite form: 0 < b < sqrt(D), sqrt(D) - b < 2|a| < sqrt(D) + b
    if b <= 0 or b * b >= D:
        return False
    ta = 2 * abs(a)
    if (ta + b) * (ta + b) <= D:  # 2|a| <= sqrt(D) - b
        return False
    if ta > b and (ta - b) * (ta - b) >= D:  # 2|a| >= sqrt(D) + b
        return False
    return True


def _rho(form, D, sq):
    """Cycle operator on reduced indefinite forms: (a,b,c) -> (c,b',c')."""
    a, b, c = form
    ac2 = 2 * abs(c)
    # unique b' == -b (mod 2|c|) with sq - 2|c| < b' <= sq
    b2 = sq - (sq + b) % ac2
    c2 = (b2 * b2 - D) // (4 * c)
    return (c, b2, c2)


def class_number_oracle(d: int) -> int:
    """Wide class number by form cycles + narrow-to-wide correction."""
    D = fundamental_discriminant(d)
    h_plus = narrow_class_number_forms(D)
    if unit_norm(D) == 1:
        assert h_plus % 2 == 0, f"narrow class number parity broken at d={d}"
        return h_plus // 2
    return h_plus


# ---------------------------------------------------------------------------
# Store + counts
# ---------------------------------------------------------------------------


class ClassStore:
    """Column-array view of a class-number CSV store."""

    def __init__(self, path: str, rows):
        self.path = path
        self.d = np.array([r[0] for r in rows], dtype=np.int64)
        self.D = np.array([r[1] for r in rows], dtype=np.int64)
        self.regulator = np.array([r[2] for r in rows], dtype=np.float64)
        self.L1 = np.array([r[3] for r in rows], dtype=np.float64)
        self.h = np.array([r[4] for r in rows], dtype=np.int64)
        self.n_rows = len(rows)

    @property
    def max_d(self) -> int:
        return int(self.d.max()) if self.n_rows else 0

    def require_range(self, x: int):
        if x > self.max_d:
            raise RangeNotCovered(f"store covers d <= {self.max_d}, requested {x}")

    @classmethod
    def load(cls, path: str) -> "ClassStore":
        opener = gzip.open if path.endswith(".gz") else open
        rows = []
        with opener(path, "rt") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != CLASS_COLUMNS.split(","):
                raise RangeNotCovered(f"unexpected class-number columns in {path}")
            for rec in reader:
                rows.append((int(rec[0]), int(rec[1]), float(rec[2]), float(rec[3]), int(rec[4])))
        return cls(path, rows)


def count_class(store: ClassStore, k: int, x: int) -> int:
    """h(k,X): number of square-free 1 < d <= X with h(d) = k."""
    store.require_range(x)
    return int(((store.d <= x) & (store.h == k)).sum())


def ratio_H(store: ClassStore, k: int, x: int) -> tuple[int, int]:
    """H(k,X) = h(1,X)/h(k,X) as an exact (numerator, denominator) pair."""
    num = count_class(store, 1, x)
    den = count_class(store, k, x)
    if den == 0:
        raise DivisionByZero(f"h({k},{x}) = 0")
    return num, den


# ---------------------------------------------------------------------------
# Chunked scan integration
# ---------------------------------------------------------------------------

_worker_state: dict = {}


def _init_class_worker(policy):
    _worker_state["policy"] = policy


def _run_class_chunk(args):
    idx, start, end = args
    mask = squarefree_mask(end)
    lines = []
    failed = 0
    for d in range(max(start, 2), end + 1):
        if not mask[d]:
            continue
        try:
            rec = class_number(d)
        except RoundingMarginFailed:
            failed += 1
            continue
        lines.append(
            f"{rec.d},{rec.D},{float(rec.regulator)!r},{float(rec.L1)!r},{rec.h}"
        )
    text = "\n".join(lines)
    if text:
        text += "\n"
    return idx, text, failed


def class_scan(x: int, config=None) -> ClassStore:
    """Class numbers for all square-free 1 < d <= x, chunked and resumable."""
    from .scan import ScanConfig, _run_chunked

    if config is None:
        config = ScanConfig()
    path = _run_chunked(
        "classnum", x, config, CLASS_COLUMNS,
        _run_class_chunk, _init_class_worker, (config.policy,),
    )
    return ClassStore.load(path)
