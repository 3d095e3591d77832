"""Analytic order of the Tate-Shafarevich group and its certification.

S = L(E_m,1) T_m / (C_fin C_inf) is certified either as a perfect square
(Cassels-Tate forces a square order) or, when the interval sits below 1/2,
as an L-vanishing twist.  The vanishing threshold is a declared policy:
exact vanishing is not numerically decidable, and the smallest admissible
nonzero analytic order is 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .curve import TwistCurve
from .errors import NotASquare, NotNearInteger
from .lseries import CertifiedValue, TolerancePolicy, DEFAULT_POLICY

#: Certified intervals entirely below this are classified as L = 0.
VANISHING_THRESHOLD = 0.5


@dataclass(frozen=True)
class ShaOutcome:
    """Certified analytic order (order = root^2) or a vanishing verdict."""

    kind: str  # "order" | "vanishing"
    order: int
    root: int
    raw: CertifiedValue


def sha_analytic(L: CertifiedValue, m: int, curve: TwistCurve) -> CertifiedValue:
    """S = L T_m / (C_fin C_inf) with linear error propagation."""
    scale = curve.torsion_factor / (curve.tamagawa_product * curve.period)
    value = L.value * scale
    # the period constant carries ~1e-15 relative error of its own
    err = L.error_bound * scale + abs(value) * 4e-15
    return CertifiedValue(value, err)


def certify(S: CertifiedValue, policy: TolerancePolicy = DEFAULT_POLICY) -> ShaOutcome:
    """Round S to a certified perfect square, or classify as vanishing."""
    if S.value + S.error_bound < VANISHING_THRESHOLD:
        return ShaOutcome("vanishing", 0, 0, S)
    n = int(round(S.value))
    delta = policy.certify_margin * max(1, n)
    if n < 1 or abs(S.value - n) + S.error_bound >= delta:
        raise NotNearInteger(
            f"S = {S.value!r} +- {S.error_bound:.3g} not within {delta:.3g} of a positive integer"
        )
    k = isqrt(n)
    if k * k != n:
        raise NotASquare(f"certified analytic order {n} is not a perfect square")
    return ShaOutcome("order", n, k, S)
