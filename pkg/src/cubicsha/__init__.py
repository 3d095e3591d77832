"""Analytic Tate-Shafarevich orders for the cubic-twist family x^3 + y^3 = m."""

from .curve import TwistCurve, build_curve, conductor, period, tamagawa_product, torsion_factor
from .eisenstein import CubicSymbol, EisensteinInt, cornacchia_4p, cubic_symbol, norm, primary_prime
from .lseries import (
    CertifiedValue,
    CoefficientTable,
    PrimeCache,
    TolerancePolicy,
    ap_good,
    central_value,
    coefficients,
    root_number,
    series_sum,
)
from .scan import ResultStore, ScanConfig, TwistResult, cubefree_iter, evaluate_twist, resume, scan_range
from .sha import ShaOutcome, certify, sha_analytic
from .classnum import ClassNumberRecord, ClassStore, class_number, class_scan, dirichlet_L1, regulator

__version__ = "0.1.0"
