"""Acceptance suite: one test per criterion, strictest stated tolerances.

Each test prints a single PASS line on success (run with -s to see them).
The X = 5000 sweep is computed per session; the X = 100000 desk store is
read from results/desk_scan_100000/ and rebuilt there only if missing.
"""

import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from cubicsha.curve import (
    is_cube_free,
    local_data_tate,
    period,
    tamagawa_local,
    torsion_factor,
)
from cubicsha.errors import NotBadPrime
from cubicsha.lseries import DEFAULT_POLICY
from cubicsha.scan import ResultStore, ScanConfig, cubefree_mask, scan_range
from cubicsha.stats import (
    cl_predicted,
    count_eps_plus,
    count_sha,
    count_vanishing,
    divisibility_freq,
    fit_powerlog,
    geometric_grid,
    standardized_values,
    CountSeries,
)

from conftest import primes_upto

ROOT = os.path.join(os.path.dirname(__file__), "..")
DESK_DIR = os.path.join(ROOT, "results", "desk_scan_100000")


def _report(n, text):
    print(f"\nACCEPTANCE {n}: PASS — {text}")


@pytest.fixture(scope="session")
def sweep5000(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep5000")
    t0 = time.time()
    store = scan_range(5000, ScanConfig(threads=2, chunk_size=512, out_dir=str(out)))
    return store, time.time() - t0


@pytest.fixture(scope="session")
def sweep5000_doubled(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep5000x2")
    policy = replace(DEFAULT_POLICY, cutoff_scale=2.0)
    store = scan_range(5000, ScanConfig(threads=2, chunk_size=512,
                                        out_dir=str(out), policy=policy))
    return store


@pytest.fixture(scope="session")
def desk_store():
    packed = os.path.join(DESK_DIR, "results.csv.gz")
    plain = os.path.join(DESK_DIR, "results.csv")
    if os.path.exists(packed):
        return ResultStore.load(packed)
    if os.path.exists(plain):
        return ResultStore.load(plain)
    print("\ndesk store missing; running the X=100000 scan once (hours-scale)")
    cfg = ScanConfig(threads=2, chunk_size=512, out_dir=DESK_DIR,
                     checkpoint_dir=os.path.join(DESK_DIR, "checkpoints"))
    return scan_range(100_000, cfg)


# -- criterion 1 -------------------------------------------------------------


def test_accept_1_formula_factors():
    t0 = time.time()
    cases = 0
    # torsion: the two exceptional twists and the generic tail
    assert torsion_factor(1) == 9 and torsion_factor(2) == 4
    for m in (3, 5, 17, 35, 9001):
        assert torsion_factor(m) == 1
    cases += 7
    # C_3 over every residue class mod 9 (cube-free representatives)
    c3_expect = {1: 3, 8: 3, 2: 2, 7: 2, 4: 1, 5: 1}
    for r, c in c3_expect.items():
        for m in (r, r + 9, r + 18, r + 36):
            assert tamagawa_local(m, 3) == c, (m, r)
            cases += 1
    for m in (3, 6, 12, 15, 9, 18, 45, 99):  # 3 | m
        assert tamagawa_local(m, 3) == 1
        cases += 1
    # C_p at p | m: p == 1 (mod 3) -> 3, p == 2 (mod 3) -> 1; p not | m -> 1
    for p in (7, 13, 19, 31, 37, 43):
        for v in (1, 2):
            assert tamagawa_local(p**v, p) == 3
            cases += 1
    for p in (2, 5, 11, 17, 23, 29):
        for v in (1, 2):
            assert tamagawa_local(p**v, p) == 1
            cases += 1
    for m, p in ((35, 2), (35, 3 + 8), (1, 7), (44, 7), (10, 7)):
        assert tamagawa_local(m, p) == 1
        cases += 1
    # period: C_inf * cbrt(m) is two-valued in [9 | m], ratios exact to 1e-12
    base = period(1)
    for m in range(1, 170):
        if not is_cube_free(m):
            continue
        got = period(m) * m ** (1.0 / 3.0)
        expect = 3.0 * base if m % 9 == 0 else base
        assert abs(got / expect - 1.0) < 1e-12, m
        cases += 1
    # the spec's stated ratio examples
    assert abs(period(8) / period(1) - 0.5) < 1e-12
    assert abs(period(9) / period(1) - 3.0 / 9 ** (1.0 / 3.0)) < 1e-12
    cases += 2
    dt = time.time() - t0
    assert cases >= 200
    assert dt < 1.0
    _report(1, f"{cases} formula-factor cases exact in {dt:.2f}s")


# -- criterion 2 -------------------------------------------------------------


def test_accept_2_coefficient_oracle(cache):
    from cubicsha.lseries import coefficients

    t0 = time.time()
    checked = 0
    ps = primes_upto(1000)
    qr_tables = {p: np.bincount((np.arange(p, dtype=np.int64) ** 2) % p, minlength=p)
                 for p in ps}
    xs_cubed = {p: (np.arange(p, dtype=np.int64) ** 3) % p for p in ps}
    for m in range(1, 51):
        if not is_cube_free(m):
            continue
        table = coefficients(m, 1000, cache).integer_values()
        for p in ps:
            if 3 * m % p == 0:
                continue
            f = (xs_cubed[p] - 432 * m * m) % p
            npoints = int(1 + qr_tables[p][f].sum())
            assert p + 1 - int(table[p]) == npoints, (m, p)
            checked += 1
    # the hand-checkable anchor
    assert coefficients(1, 7, cache).integer_values()[7] == -1
    dt = time.time() - t0
    assert dt < 60.0
    _report(2, f"{checked} point counts match a_p in {dt:.1f}s (incl. a_7(E_1) = -1)")


# -- criterion 3 -------------------------------------------------------------


def test_accept_3_tate_cross_check():
    t0 = time.time()
    limit = 10**5
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in primes_upto(limit):
        spf[p::p][spf[p::p] == 0] = p
    checked = 0
    for m in range(1, limit + 1):
        factors = []
        n = m
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
        if any(e > 2 for _, e in factors):
            continue
        bad = sorted({3}.union(p for p, _ in factors))
        for p in bad:
            try:
                data = local_data_tate(m, p, factors)
            except NotBadPrime:
                continue
            assert data.tamagawa == tamagawa_local(m, p), (m, p)
            checked += 1
    dt = time.time() - t0
    assert dt < 60.0
    _report(3, f"Tate c_p == closed form at {checked} (m,p) pairs, m <= 1e5, in {dt:.1f}s")


# -- criteria 4 and 5 --------------------------------------------------------


def test_accept_4_square_certification_sweep(sweep5000, sweep5000_doubled):
    store, dt = sweep5000
    assert store.n_rows == int(cubefree_mask(5000).sum())
    assert store.quarantined == 0
    order = store.kind == 0
    sha = store.sha[order]
    roots = np.sqrt(sha).round().astype(np.int64)
    assert (roots * roots == sha).all()
    assert (sha >= 1).all()
    doubled = sweep5000_doubled
    assert (doubled.m == store.m).all()
    assert (doubled.kind == store.kind).all()
    assert (doubled.sha == store.sha).all()
    assert dt <= 600.0
    _report(4, f"X=5000 sweep: {store.n_rows} rows, 0 quarantined, all orders square, "
               f"doubled cutoff identical, {dt:.0f}s on 2 cores")


def test_accept_5_conservation(sweep5000):
    store, _ = sweep5000
    grid = geometric_grid(store.max_m)
    for x in grid:
        ks = np.unique(store.sha[(store.kind == 0) & (store.m <= x)])
        f_sum = sum(count_sha(store, int(math.isqrt(int(k2))), x) for k2 in ks)
        assert f_sum + count_vanishing(store, x) == count_eps_plus(store, x), x
    _report(5, f"sum_k f(k,X) + g(X) = #eps=+1 exactly at grid {grid}")


# -- criterion 6 -------------------------------------------------------------


def test_accept_6_cohen_lenstra_published_values():
    stated = {2: 0.580577, 3: 0.360995, 5: 0.206660, 7: 0.145408}
    values = {p: cl_predicted(p) for p in stated}  # warm
    t0 = time.perf_counter()
    values = {p: cl_predicted(p) for p in stated}
    dt = time.perf_counter() - t0
    assert dt < 0.001, f"runtime {dt*1000:.3f} ms"
    failures = []
    for p, target in stated.items():
        if abs(values[p] - target) >= 1e-6:
            failures.append((p, values[p], target))
    assert not failures, (
        "published values not reproduced to 6 decimals: "
        + "; ".join(f"f_0({p}) = {got:.10f} vs printed {t}" for p, got, t in failures)
        + " — the p=5 entry conflicts with the paper's own product formula "
        "(true value 0.2066645303); see the decisions ledger."
    )
    _report(6, "f_0(2,3,5,7) match the published values to 6 decimals")


# -- criterion 7 -------------------------------------------------------------


def test_accept_7_distribution_sanity(desk_store):
    store = desk_store
    assert store.max_m >= 99999
    values, _ = standardized_values(store, "logL")
    mean = float(values.mean())
    var = float(values.var())
    assert -0.3 <= mean <= 0.3, f"logL mean {mean}"
    assert 0.6 <= var <= 1.4, f"logL variance {var}"
    grid = geometric_grid(store.max_m)
    for p in (5, 7, 11):
        freqs = [divisibility_freq(store, p, x) for x in grid]
        assert all(b > a for a, b in zip(freqs, freqs[1:])), (p, freqs)
        assert all(f < cl_predicted(p) for f in freqs), (p, freqs)
    f3 = divisibility_freq(store, 3, store.max_m)
    assert f3 > 0.36, f3
    _report(7, f"X=1e5: logL mean {mean:+.3f}, var {var:.3f}; f_5/f_7/f_11 "
               f"increasing and below f_0; f_3 = {f3:.4f} > 0.36")


# -- criterion 8 -------------------------------------------------------------


def test_accept_8_class_numbers(tmp_path):
    from cubicsha.classnum import (
        class_number,
        class_number_oracle,
        class_scan,
        count_class,
        ratio_H,
        squarefree_mask,
    )

    t0 = time.time()
    mask = squarefree_mask(2000)
    checked = 0
    for d in range(2, 2001):
        if not mask[d]:
            continue
        assert class_number(d).h == class_number_oracle(d), d
        checked += 1
    dt = time.time() - t0
    assert dt < 300.0
    store = class_scan(500, ScanConfig(threads=1, chunk_size=250, out_dir=str(tmp_path)))
    top = store.max_d
    for x in (100, 250, top):
        num, den = ratio_H(store, 1, x)
        assert num == den
        total = sum(count_class(store, int(k), x) for k in np.unique(store.h))
        assert total == int(((store.d >= 2) & (store.d <= x)).sum())
    _report(8, f"h(d) == form-class oracle for {checked} square-free d <= 2000 "
               f"in {dt:.0f}s; H(1,X) = 1; counts conserve")


# -- criterion 9 -------------------------------------------------------------


def test_accept_9_regression_recovery():
    grid = tuple(1000 * 2**i for i in range(9))
    for c, d in ((2.0, 1.0), (0.17, -0.625), (1.0, 0.0)):
        counts = tuple(c * x ** (5.0 / 6.0) * (math.log(x) ** d) for x in grid)
        got_c, got_d = fit_powerlog(CountSeries(grid, counts))
        assert abs(got_c - c) < 1e-6 and abs(got_d - d) < 1e-6, (c, d)
    _report(9, "fit_powerlog recovers synthetic (c, d) to 1e-6")


# -- criterion 10 ------------------------------------------------------------


def test_accept_10_long_run_targets_documented(sweep5000):
    readme = open(os.path.join(ROOT, "README.md")).read()
    for token in ("0.4574860107", "0.0713684943", "0.175", "0.7", "3·10^10"):
        assert token in readme or token.replace("·", "*") in readme, token
    # resuming toward them must be possible: the sweep's manifest reloads
    store, _ = sweep5000
    from cubicsha.scan import MANIFEST_NAME, ScanManifest

    manifest = ScanManifest.load(os.path.join(os.path.dirname(store.path), MANIFEST_NAME))
    assert manifest.maximum == 5000 and manifest.chunks
    _report(10, "long-run targets documented as such; manifests reload for resume")
