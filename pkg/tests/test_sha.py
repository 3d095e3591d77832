import pytest

from cubicsha.curve import build_curve
from cubicsha.errors import NotASquare, NotNearInteger
from cubicsha.lseries import CertifiedValue, central_value
from cubicsha.sha import certify, sha_analytic


def test_certify_rounding():
    out = certify(CertifiedValue(3.9999, 1e-5))
    assert (out.kind, out.order, out.root) == ("order", 4, 2)


def test_certify_vanishing():
    out = certify(CertifiedValue(0.0001, 1e-5))
    assert out.kind == "vanishing"
    assert out.order == 0 and out.root == 0


def test_certify_not_a_square():
    with pytest.raises(NotASquare):
        certify(CertifiedValue(2.0000, 1e-5))


def test_certify_not_near_integer():
    with pytest.raises(NotNearInteger):
        certify(CertifiedValue(1.4, 1e-5))
    with pytest.raises(NotNearInteger):
        certify(CertifiedValue(0.6, 0.01))  # rounds to 1 but misses the margin


def test_certify_wide_interval_near_zero():
    # interval containing 0 with width < 0.1 classifies as vanishing
    out = certify(CertifiedValue(0.01, 0.04))
    assert out.kind == "vanishing"


def test_sha_analytic_linearity():
    curve = build_curve(5)
    L = CertifiedValue(0.0, 0.05)
    S = sha_analytic(L, 5, curve)
    assert abs(S.value) < 1e-12
    assert S.error_bound > 0


def test_sha_analytic_synthetic_exact():
    curve = build_curve(7)  # eps(7) = -1, but the algebra is sign-blind
    L = CertifiedValue(2.0 * curve.tamagawa_product * curve.period / curve.torsion_factor, 0.0)
    S = sha_analytic(L, 7, curve)
    assert abs(S.value - 2.0) < 1e-12


def test_sha_e1_is_one(cache):
    curve = build_curve(1)
    L = central_value(1, cache=cache)
    out = certify(sha_analytic(L, 1, curve))
    assert (out.kind, out.order, out.root) == ("order", 1, 1)


def test_outcome_independent_of_cutoff(cache):
    from dataclasses import replace

    from cubicsha.lseries import DEFAULT_POLICY

    for m in (1, 2, 5, 10, 11):
        curve = build_curve(m)
        base = certify(sha_analytic(central_value(m, cache=cache), m, curve))
        policy = replace(DEFAULT_POLICY, cutoff_scale=2.0)
        double = certify(sha_analytic(central_value(m, policy, cache=cache), m, curve))
        assert base.kind == double.kind and base.root == double.root
