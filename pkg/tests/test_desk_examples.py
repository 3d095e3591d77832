"""Desk-scale checks that need the cached X = 100000 stores.

These are qualitative/loose-tolerance expectations over the big runs (the
acceptance gate covers the strict ones); they are skipped when the caches
have not been generated yet (scripts/run_desk_scan.py,
scripts/run_desk_classnum.py).
"""

import os

import numpy as np
import pytest

from cubicsha.classnum import ClassStore
from cubicsha.scan import ResultStore
from cubicsha.stats import (
    count_series,
    count_vanishing,
    delaunay_normalized,
    fit_powerlog,
    geometric_grid,
    report_g_normalized,
    watkins_reference,
)

ROOT = os.path.join(os.path.dirname(__file__), "..")
TWIST_CACHE = os.path.join(ROOT, "results", "desk_scan_100000", "results.csv.gz")
CLASS_CACHE = os.path.join(ROOT, "results", "desk_classnum_100000", "results.csv.gz")

needs_twist = pytest.mark.skipif(not os.path.exists(TWIST_CACHE),
                                 reason="desk twist cache not generated")
needs_class = pytest.mark.skipif(not os.path.exists(CLASS_CACHE),
                                 reason="desk class-number cache not generated")


@pytest.fixture(scope="module")
def twists():
    return ResultStore.load(TWIST_CACHE)


@pytest.fixture(scope="module")
def classes():
    return ClassStore.load(CLASS_CACHE)


@needs_twist
def test_gstar_fit_constant_in_loose_window(twists):
    grid = geometric_grid(twists.max_m)
    series = count_series(twists, lambda x: count_vanishing(twists, x, True), grid)
    c, d = fit_powerlog(series)
    assert 0.05 <= c <= 0.5, (c, d)


@needs_twist
def test_gstar_tracks_watkins_curve(twists):
    # the normalized prime-twist vanishing count sits in a sane band around
    # the reference constant at desk scale
    x = twists.max_m
    ratio = count_vanishing(twists, x, True) / (6.0 * watkins_reference(x))
    assert 0.05 < ratio < 0.5, ratio


@needs_twist
def test_delaunay_curves_flatten(twists):
    grid = [x for x in geometric_grid(twists.max_m) if x >= 4000]
    for subset in ("primes", "all"):
        vals = [delaunay_normalized(twists, t, subset) for t in grid]
        steps = [abs(b / a - 1.0) for a, b in zip(vals, vals[1:])]
        # relative movement shrinks toward the tail of the range
        assert np.mean(steps[-2:]) < np.mean(steps[:2]), (subset, vals)


@needs_twist
def test_report_g_normalized_positive(twists):
    _, rows = report_g_normalized(twists)
    assert all(v > 0 for _, v in rows[1:])


@needs_class
def test_classnum_rounding_margin_desk(classes):
    raw = np.sqrt(classes.D) * classes.L1 / (2.0 * classes.regulator)
    assert np.abs(raw - classes.h).max() < 0.25


@needs_class
def test_classnum_h1_share_or_magnitude(classes):
    # class number one occurs with substantial frequency in the range
    share = float((classes.h == 1).mean())
    assert 0.3 < share < 0.9, share
