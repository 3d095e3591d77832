"""The twist family E_m : y^2 = x^3 - 432 m^2 and its arithmetic invariants.

Provides every non-L-series ingredient of the analytic-order formula:
Weierstrass model, torsion factor T_m, Tamagawa numbers (closed form and
Tate's algorithm), real period, and conductor.

Tate's algorithm is entered only through the short model above, but runs
in full generality internally: at p = 2, 3 the required translations and
the non-minimality restart leave the short form (the 2-minimal model of
X_0(27) is y^2 + y = x^3 - 7).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

from .errors import NotBadPrime, NotCubeFree

#: Gamma(1/3), frozen from a 50-digit arbitrary-precision evaluation.
GAMMA_THIRD = 2.678938534707747633655692940974677644129

#: Gamma(1/3)^3 / (2 pi sqrt(3)) = C_inf(E_1).
_PERIOD_BASE = GAMMA_THIRD**3 / (2.0 * pi * sqrt(3.0))


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, ascending primes."""
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return out


def is_cube_free(m: int, factors=None) -> bool:
    if factors is None:
        factors = factorize(m)
    return all(e <= 2 for _, e in factors)


def _require_cube_free(m: int, factors=None):
    if m < 1:
        raise NotCubeFree(f"m={m} is not a positive integer")
    if not is_cube_free(m, factors):
        raise NotCubeFree(f"m={m} is divisible by a prime cube")


@dataclass(frozen=True)
class LocalData:
    """Local invariants of E_m at a bad prime, from Tate's algorithm."""

    p: int
    conductor_exponent: int
    kodaira: str
    tamagawa: int


@dataclass(frozen=True)
class TwistCurve:
    """E_m with every arithmetic factor of the analytic-order formula."""

    m: int
    a6: int
    conductor: int
    local_data: tuple[LocalData, ...]
    period: float
    tamagawa_product: int
    torsion_factor: int


def curve_model(m: int) -> tuple[int, int]:
    """(m, a6) of the Weierstrass model y^2 = x^3 - 432 m^2."""
    _require_cube_free(m)
    return m, -432 * m * m


def torsion_factor(m: int) -> int:
    """T_1 = 9, T_2 = 4, T_m = 1 for m > 2."""
    if m == 1:
        return 9
    if m == 2:
        return 4
    return 1


def tamagawa_local(m: int, p: int) -> int:
    """Tamagawa number of E_m at p, closed form.

    1 at good primes; for p | m, p != 3: 3 if p == 1 (mod 3) else 1;
    at p = 3: 3 / 2 / 1 according to m == +-1 / +-2 / +-4 (mod 9),
    and 1 when 3 | m.
    """
    if p == 3:
        r = m % 9
        if r in (1, 8):
            return 3
        if r in (2, 7):
            return 2
        return 1  # +-4 mod 9, or 3 | m
    if m % p != 0:
        return 1
    return 3 if p % 3 == 1 else 1


def tamagawa_product(m: int, factors=None) -> int:
    """C_fin(E_m): product of local Tamagawa numbers over bad primes."""
    _require_cube_free(m, factors)
    if factors is None:
        factors = factorize(m)
    c = tamagawa_local(m, 3)
    for p, _ in factors:
        if p != 3:
            c *= tamagawa_local(m, p)
    return c


def period(m: int) -> float:
    """Real period C_inf(E_m), relative accuracy ~1e-15.

    Gamma(1/3)^3 / (2 pi sqrt(3) m^(1/3)), tripled when 9 | m.  Pure
    closed-form evaluation, defined for any positive m.
    """
    if m < 1:
        raise NotCubeFree(f"m={m} is not a positive integer")
    c = _PERIOD_BASE / float(m) ** (1.0 / 3.0)
    if m % 9 == 0:
        c *= 3.0
    return c


# ---------------------------------------------------------------------------
# Tate's algorithm
# ---------------------------------------------------------------------------


def _vp(n: int, p: int) -> int:
    if n == 0:
        return 10**9  # stands in for +infinity
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _shift_r(ai, r):
    a1, a2, a3, a4, a6 = ai
    return (
        a1,
        a2 + 3 * r,
        a3 + r * a1,
        a4 + 2 * r * a2 + 3 * r * r,
        a6 + r * a4 + r * r * a2 + r**3,
    )


def _shift_s(ai, s):
    a1, a2, a3, a4, a6 = ai
    return (a1 + 2 * s, a2 - s * a1 - s * s, a3, a4 - s * a3, a6)


def _shift_t(ai, t):
    a1, a2, a3, a4, a6 = ai
    return (a1, a2, a3 + 2 * t, a4 - t * a1, a6 - t * a3 - t * t)


def _b_invariants(ai):
    a1, a2, a3, a4, a6 = ai
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def _discriminant(ai):
    b2, b4, b6, b8 = _b_invariants(ai)
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def _quadratic_has_root(a, b, c, p):
    """Does a*Y^2 + b*Y + c have a root in F_p (a != 0 mod p)?"""
    if p == 2:
        return c % 2 == 0 or (a + b + c) % 2 == 0
    disc = (b * b - 4 * a * c) % p
    return disc == 0 or pow(disc, (p - 1) // 2, p) == 1


def _cubic_roots_structure(A, B, C, p):
    """Root structure of T^3 + A T^2 + B T + C over F_p.

    Returns ("distinct", nroots_in_Fp), ("double", root) or ("triple", root),
    where root is the repeated root in F_p (repeated roots of a cubic over
    F_p always lie in F_p).
    """
    A, B, C = A % p, B % p, C % p
    if p <= 3:
        best = ("distinct", 0)
        nroots = 0
        for t in range(p):
            e = _root_multiplicity(A, B, C, t, p)
            if e >= 1:
                nroots += 1
            if e == 3:
                return "triple", t
            if e == 2:
                best = ("double", t)
        if best[0] == "double":
            return best
        return "distinct", nroots
    # p >= 5: classify via gcd(P, P')
    if A == 0 and B == 0 and C == 0:
        return "triple", 0
    g = _poly_gcd_cubic(A, B, C, p)
    if g is None:  # squarefree
        return "distinct", _count_roots_cubic(A, B, C, p)
    deg, coeffs = g
    if deg == 1:
        root = (-coeffs[0] * pow(coeffs[1], -1, p)) % p
        return "double", root
    # P = (T - r)^3 with 3r = -A
    root = (-A * pow(3, -1, p)) % p
    return "triple", root


def _root_multiplicity(A, B, C, t, p):
    """Multiplicity of t as a root of T^3+AT^2+BT+C mod p (0 if not a root)."""
    coeffs = [C % p, B % p, A % p, 1]
    e = 0
    while len(coeffs) > 1 and _poly_eval(coeffs, t, p) == 0:
        coeffs = _poly_deflate(coeffs, t, p)
        e += 1
    return e


def _poly_eval(coeffs, t, p):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * t + c) % p
    return acc


def _poly_deflate(coeffs, t, p):
    """Synthetic division by (T - t); caller guarantees t is a root."""
    q = []
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * t + c) % p
        q.append(acc)
    return list(reversed(q[:-1]))


def _poly_trim(f, p):
    f = [c % p for c in f]
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _poly_is_zero(f):
    return all(c == 0 for c in f)


def _poly_mod(f, g, p):
    """Remainder of f modulo g in F_p[T]; coefficients low-to-high."""
    f = _poly_trim(list(f), p)
    g = _poly_trim(list(g), p)
    inv = pow(g[-1], -1, p)
    while len(f) >= len(g) and not _poly_is_zero(f):
        coef = f[-1] * inv % p
        shift = len(f) - len(g)
        for i, c in enumerate(g):
            f[shift + i] = (f[shift + i] - coef * c) % p
        f = _poly_trim(f, p)
    return f


def _poly_gcd(f, g, p):
    """Monic gcd in F_p[T]."""
    f, g = _poly_trim(f, p), _poly_trim(g, p)
    while not _poly_is_zero(g):
        f, g = g, _poly_mod(f, g, p)
    inv = pow(f[-1], -1, p)
    return [c * inv % p for c in f]


def _poly_gcd_cubic(A, B, C, p):
    """gcd(P, P') for P = T^3+AT^2+BT+C over F_p (p >= 5).

    None when P is squarefree, else (deg, monic coeffs low-to-high).
    """
    f = [C % p, B % p, A % p, 1]
    fprime = [B % p, (2 * A) % p, 3 % p]
    g = _poly_gcd(f, fprime, p)
    if len(g) == 1:
        return None
    return len(g) - 1, g


def _poly_mulmod(f, g, mod, p):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _poly_mod(out, mod, p)


def _count_roots_cubic(A, B, C, p):
    """Number of F_p-roots of a squarefree cubic: deg gcd(T^p - T, P)."""
    mod = [C % p, B % p, A % p, 1]
    base = [0, 1]  # T
    result = [1]
    e = p
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    # T^p - T mod P
    frob = list(result) + [0] * max(0, 2 - len(result))
    frob[1] = (frob[1] - 1) % p
    if _poly_is_zero(_poly_trim(frob, p)):
        return 3  # every root is in F_p
    g = _poly_gcd(mod, frob, p)
    return len(g) - 1


def _singular_point(ai, p):
    """Singular point (x0, y0) of the reduced curve mod p."""
    a1, a2, a3, a4, a6 = ai
    if p <= 3:
        for x0 in range(p):
            for y0 in range(p):
                on = (y0 * y0 + a1 * x0 * y0 + a3 * y0 - x0**3 - a2 * x0 * x0 - a4 * x0 - a6) % p
                dy = (2 * y0 + a1 * x0 + a3) % p
                dx = (a1 * y0 - 3 * x0 * x0 - 2 * a2 * x0 - a4) % p
                if on == 0 and dy == 0 and dx == 0:
                    return x0, y0
        raise AssertionError("no singular point found mod p")
    b2, b4, b6, _ = _b_invariants(ai)
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    if c4 % p == 0:
        x0 = (-b2 * pow(12, -1, p)) % p
    else:
        x0 = (-(c6 + b2 * c4) * pow(12 * c4, -1, p)) % p
    y0 = (-(a1 * x0 + a3) * pow(2, -1, p)) % p
    return x0, y0


def tate_algorithm(ai: tuple[int, int, int, int, int], p: int) -> LocalData:
    """Kodaira type, conductor exponent and Tamagawa number of [a1..a6] at p.

    Textbook Tate: classify, translating as required; on reaching the
    non-minimal terminal step, rescale by u = p and restart.
    """
    ai = tuple(int(x) for x in ai)
    while True:
        delta = _discriminant(ai)
        n = _vp(delta, p)
        if n == 0:
            return LocalData(p, 0, "I0", 1)

        x0, y0 = _singular_point(ai, p)
        ai = _shift_t(_shift_r(ai, x0), y0)
        a1, a2, a3, a4, a6 = ai
        b2, b4, b6, b8 = _b_invariants(ai)

        if b2 % p != 0:
            # multiplicative: type I_n
            if _quadratic_has_root(1, a1, -a2, p):
                c = n  # split
            else:
                c = 2 if n % 2 == 0 else 1
            return LocalData(p, 1, f"I{n}", c)

        if a6 % (p * p) != 0:
            return LocalData(p, n, "II", 1)
        if b8 % p**3 != 0:
            return LocalData(p, n - 1, "III", 2)
        if b6 % p**3 != 0:
            c = 3 if _quadratic_has_root(1, a3 // p, -(a6 // (p * p)), p) else 1
            return LocalData(p, n - 2, "IV", c)

        # normalize: p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = a2 % 2
            ai = _shift_s(ai, s)
            a6 = ai[4]
            t = 2 * ((a6 // 4) % 2)
            ai = _shift_t(ai, t)
        else:
            s = (-a1 * pow(2, -1, p)) % p
            ai = _shift_s(ai, s)
            a3 = ai[2]
            t = p * ((-(a3 // p) * pow(2, -1, p)) % p)
            ai = _shift_t(ai, t)
        a1, a2, a3, a4, a6 = ai
        assert a1 % p == 0 and a2 % p == 0
        assert a3 % (p * p) == 0 and a4 % (p * p) == 0 and a6 % p**3 == 0

        kind, root = _cubic_roots_structure(a2 // p, a4 // (p * p), a6 // p**3, p)
        if kind == "distinct":
            return LocalData(p, n - 4, "I0*", 1 + root)  # root = #roots in F_p

        if kind == "double":
            # I_m* sub-procedure: translate double root to 0, then walk
            ai = _shift_r(ai, p * root)
            return _in_star_loop(ai, p, n)

        # triple root
        ai = _shift_r(ai, p * root)
        a1, a2, a3, a4, a6 = ai
        a3t, a6t = a3 // (p * p), a6 // p**4
        if (a3t * a3t + 4 * a6t) % p != 0:
            c = 3 if _quadratic_has_root(1, a3t, -a6t, p) else 1
            return LocalData(p, n - 6, "IV*", c)

        # double root of the Y-quadratic: translate and continue
        if p == 2:
            y1 = a6t % 2
        else:
            y1 = (-a3t * pow(2, -1, p)) % p
        ai = _shift_t(ai, p * p * y1)
        a1, a2, a3, a4, a6 = ai
        if a4 % p**4 != 0:
            return LocalData(p, n - 7, "III*", 2)
        if a6 % p**6 != 0:
            return LocalData(p, n - 8, "II*", 1)

        # non-minimal: rescale by u = p and restart
        ai = (a1 // p, a2 // p**2, a3 // p**3, a4 // p**4, a6 // p**6)


def _in_star_loop(ai, p, n):
    """Types I_m* (m >= 1): alternating quadratic tests in Y and X."""
    m = 1
    mx = p * p
    my = p * p
    while True:
        a1, a2, a3, a4, a6 = ai
        a3t = a3 // my
        a6t = a6 // (mx * my)
        if (a3t * a3t + 4 * a6t) % p != 0:
            c = 4 if _quadratic_has_root(1, a3t, -a6t, p) else 2
            return LocalData(p, n - m - 4, f"I{m}*", c)
        if p == 2:
            y1 = a6t % 2
        else:
            y1 = (-a3t * pow(2, -1, p)) % p
        ai = _shift_t(ai, my * y1)
        my *= p
        m += 1

        a1, a2, a3, a4, a6 = ai
        a2t = a2 // p
        a4t = a4 // (p * mx)
        a6t = a6 // (mx * my)
        if (a4t * a4t - 4 * a2t * a6t) % p != 0:
            c = 4 if _quadratic_has_root(a2t, a4t, a6t, p) else 2
            return LocalData(p, n - m - 4, f"I{m}*", c)
        if p == 2:
            x1 = (a6t * pow(a2t % 2 or 1, -1, 2)) % 2
        else:
            x1 = (-a4t * pow(2 * a2t, -1, p)) % p
        ai = _shift_r(ai, mx * x1)
        mx *= p
        m += 1


def local_data_tate(m: int, p: int, factors=None) -> LocalData:
    """Tate's algorithm for E_m at a bad prime p."""
    _require_cube_free(m, factors)
    if p != 3 and m % p != 0:
        raise NotBadPrime(f"p={p} is a prime of good reduction for m={m}")
    data = tate_algorithm((0, 0, 0, 0, -432 * m * m), p)
    if data.conductor_exponent == 0:
        raise NotBadPrime(f"p={p} is a prime of good reduction for m={m}")
    return data


def conductor(m: int, factors=None) -> int:
    """Conductor of E_m: product of p^{f_p} over bad primes."""
    _require_cube_free(m, factors)
    if factors is None:
        factors = factorize(m)
    bad = {3}
    bad.update(p for p, _ in factors)
    n = 1
    for p in sorted(bad):
        try:
            data = local_data_tate(m, p, factors)
        except NotBadPrime:
            continue
        n *= p**data.conductor_exponent
    return n


def build_curve(m: int, factors=None) -> TwistCurve:
    """Fully populated TwistCurve for cube-free m."""
    if factors is None:
        factors = factorize(m)
    _require_cube_free(m, factors)
    bad = sorted({3}.union(p for p, _ in factors))
    locals_ = []
    n = 1
    for p in bad:
        try:
            data = local_data_tate(m, p, factors)
        except NotBadPrime:
            continue
        locals_.append(data)
        n *= p**data.conductor_exponent
    cfin = 1
    for data in locals_:
        cfin *= data.tamagawa
    return TwistCurve(
        m=m,
        a6=-432 * m * m,
        conductor=n,
        local_data=tuple(locals_),
        period=period(m),
        tamagawa_product=cfin,
        torsion_factor=torsion_factor(m),
    )
