"""Exact arithmetic in Z[w], w^2 + w + 1 = 0.

Supplies the CM data behind the twisted L-series coefficients: prime
splitting, the 4p = L^2 + 27M^2 decomposition, and cubic residue symbols.
Everything here is a pure function on value types.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import isqrt

from .errors import NotPrimary, NotSplitPrime, OverflowBudget

_INT128_MAX = 1 << 127


@dataclass(frozen=True)
class EisensteinInt:
    """Element a + b*w of the Eisenstein integers."""

    a: int
    b: int

    def __add__(self, other: "EisensteinInt") -> "EisensteinInt":
        return EisensteinInt(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "EisensteinInt") -> "EisensteinInt":
        return EisensteinInt(self.a - other.a, self.b - other.b)

    def __mul__(self, other: "EisensteinInt") -> "EisensteinInt":
        # (a+bw)(c+dw) = ac - bd + (ad + bc - bd) w  since w^2 = -1 - w
        a, b, c, d = self.a, self.b, other.a, other.b
        return EisensteinInt(a * c - b * d, a * d + b * c - b * d)

    def __neg__(self) -> "EisensteinInt":
        return EisensteinInt(-self.a, -self.b)

    def conjugate(self) -> "EisensteinInt":
        # conj(w) = w^2 = -1 - w
        return EisensteinInt(self.a - self.b, -self.b)

    def is_primary(self) -> bool:
        """Primary normalization: == 2 (mod 3) in Z[w]."""
        return self.a % 3 == 2 and self.b % 3 == 0


ONE = EisensteinInt(1, 0)
OMEGA = EisensteinInt(0, 1)

#: The six units of Z[w]: +-1, +-w, +-w^2.
UNITS = (
    EisensteinInt(1, 0),
    EisensteinInt(0, 1),
    EisensteinInt(-1, -1),
    EisensteinInt(-1, 0),
    EisensteinInt(0, -1),
    EisensteinInt(1, 1),
)


def norm(z: EisensteinInt) -> int:
    """N(a + bw) = a^2 - ab + b^2 >= 0."""
    n = z.a * z.a - z.a * z.b + z.b * z.b
    if n >= _INT128_MAX:
        raise OverflowBudget(f"norm({z.a}+{z.b}w) exceeds the 128-bit budget")
    return n


class CubicSymbol(enum.Enum):
    """Value of the cubic residue character: 0, 1, w or w^2."""

    ZERO = 0
    ONE = 1
    OMEGA = 2
    OMEGA2 = 3

    def __mul__(self, other: "CubicSymbol") -> "CubicSymbol":
        if self is CubicSymbol.ZERO or other is CubicSymbol.ZERO:
            return CubicSymbol.ZERO
        j = (self.value - 1 + other.value - 1) % 3
        return CubicSymbol(j + 1)

    @property
    def exponent(self) -> int:
        """j with value w^j; only defined for nonzero symbols."""
        if self is CubicSymbol.ZERO:
            raise ValueError("zero symbol has no exponent")
        return self.value - 1


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sqrt_mod(a: int, p: int) -> int:
    """Square root of a modulo an odd prime p (Tonelli-Shanks).

    Caller guarantees a is a quadratic residue.
    """
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # write p-1 = q * 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    # find a non-residue
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t * t % p, 1
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _check_split(p: int) -> None:
    if p % 3 != 1 or not is_prime(p):
        raise NotSplitPrime(f"p={p} is not a prime == 1 (mod 3)")


def cornacchia_4p(p: int) -> tuple[int, int]:
    """Unique (L, M) with 4p = L^2 + 27M^2, L == 1 (mod 3), M >= 0.

    Modified Cornacchia for the discriminant D = -27: a square root of
    -27 mod p is lifted to x0 with x0^2 == -27 (mod 4p), then the
    Euclidean descent on (2p, x0) lands on the solution.
    """
    _check_split(p)
    x0 = sqrt_mod(-27 % p, p)
    if x0 % 2 != 1:  # need x0 odd so x0^2 == -27 (mod 4)
        x0 = p - x0
    a, b = 2 * p, x0
    limit = isqrt(4 * p)
    while b > limit:
        a, b = b, a % b
    c, rem = divmod(4 * p - b * b, 27)
    if rem != 0:
        raise NotSplitPrime(f"p={p}: descent failed, 27 does not divide 4p-b^2")
    m = isqrt(c)
    if m * m != c:
        raise NotSplitPrime(f"p={p}: descent failed, residue not a square")
    L = b if b % 3 == 1 else -b
    return L, m


def primary_prime(p: int) -> EisensteinInt:
    """The primary prime pi above p with positive w-coefficient.

    pi = (L+3M)/2 + 3M*w has norm p, satisfies pi == 2 (mod 3), and among
    the two primary elements of norm p (pi and its conjugate) is the one
    with b > 0.
    """
    L, M = cornacchia_4p(p)
    pi = EisensteinInt((L + 3 * M) // 2, 3 * M)
    return pi


def omega_residue(pi: EisensteinInt) -> int:
    """Image of w under Z[w]/(pi) = F_p, i.e. -a * b^-1 mod p."""
    p = norm(pi)
    return (-pi.a * pow(pi.b, -1, p)) % p


def cubic_symbol(alpha: EisensteinInt, pi: EisensteinInt) -> CubicSymbol:
    """Cubic residue symbol (alpha / pi)_3 for a primary prime pi.

    Computed as the class of alpha^((p-1)/3) in Z[w]/(pi) = F_p, where
    w maps to the cube root of unity z = -a/b mod p.
    """
    if not pi.is_primary():
        raise NotPrimary(f"{pi} is not primary")
    p = norm(pi)
    _check_split(p)
    z = omega_residue(pi)
    r = (alpha.a + alpha.b * z) % p
    if r == 0:
        return CubicSymbol.ZERO
    s = pow(r, (p - 1) // 3, p)
    if s == 1:
        return CubicSymbol.ONE
    if s == z:
        return CubicSymbol.OMEGA
    if s == z * z % p:
        return CubicSymbol.OMEGA2
    raise AssertionError(f"cubic symbol landed outside mu_3: p={p}, s={s}")
