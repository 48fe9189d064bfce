"""KS test against brute-force scan and full-enumeration oracles."""

import itertools
from math import comb

import numpy as np
import pytest

from pixelgan.errors import ArgumentError, DataError
from pixelgan.stats import TestMethod, ks_two_sample


# --- oracles ---------------------------------------------------------------------

def ks_statistic_brute(x, y):
    """Scan |Fx - Fy| at every pooled sample point."""
    best = 0.0
    for t in np.concatenate([x, y]):
        fx = np.sum(x <= t) / x.size
        fy = np.sum(y <= t) / y.size
        best = max(best, abs(fx - fy))
    return best


def ks_numerator_brute(x, y):
    n, m = x.size, y.size
    best = 0
    for t in np.concatenate([x, y]):
        best = max(best, abs(int(np.sum(x <= t)) * m - int(np.sum(y <= t)) * n))
    return best


def ks_exact_pvalue_oracle(x, y):
    """Full enumeration over all C(n+m, n) splits of the pooled sample.

    Integer numerators make the >= comparison exact under ties.
    """
    n, m = x.size, y.size
    pooled = np.concatenate([x, y])
    d_obs = ks_numerator_brute(x, y)
    hits = 0
    total = 0
    for picks in itertools.combinations(range(n + m), n):
        mask = np.zeros(n + m, dtype=bool)
        mask[list(picks)] = True
        if ks_numerator_brute(pooled[mask], pooled[~mask]) >= d_obs:
            hits += 1
        total += 1
    return hits / total


def ks_exact_pvalue_oracle_fast(x, y):
    """Vectorized full enumeration; same count as the loop oracle."""
    n, m = x.size, y.size
    pooled = np.sort(np.concatenate([x, y]))
    d_obs = ks_numerator_brute(x, y)
    combos = np.array(list(itertools.combinations(range(n + m), n)), dtype=np.int64)
    member = np.zeros((combos.shape[0], n + m), dtype=np.int64)
    np.put_along_axis(member, combos, 1, axis=1)
    cx = np.cumsum(member, axis=1)
    cy = np.arange(1, n + m + 1)[None, :] - cx
    dev = np.abs(cx * m - cy * n)
    boundary = np.r_[pooled[1:] != pooled[:-1], True]
    dmax = dev[:, boundary].max(axis=1)
    return int(np.sum(dmax >= d_obs)) / comb(n + m, n)


# --- statistic --------------------------------------------------------------------

def test_identical_samples_give_zero_and_p_one():
    x = np.array([1.0, 2.0, 2.0, 3.5])
    for method in (TestMethod.KS_ASYMPTOTIC, TestMethod.KS_EXACT):
        res = ks_two_sample(x, x.copy(), method=method)
        assert res.statistic == 0.0
        assert res.p_value == 1.0


def test_disjoint_supports_give_statistic_one():
    x = np.array([0.0, 0.5, 1.0])
    y = np.array([5.0, 6.0, 7.0, 8.0])
    assert ks_two_sample(x, y).statistic == 1.0


def test_statistic_matches_brute_scan_exactly():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n, m = rng.integers(1, 11, size=2)
        x = rng.normal(size=n)
        y = rng.normal(loc=rng.uniform(-1, 1), size=m)
        res = ks_two_sample(x, y)
        assert res.statistic == ks_statistic_brute(x, y)


def test_statistic_matches_brute_scan_with_ties():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n, m = rng.integers(1, 11, size=2)
        x = rng.integers(0, 4, size=n).astype(float)
        y = rng.integers(0, 4, size=m).astype(float)
        assert ks_two_sample(x, y).statistic == ks_statistic_brute(x, y)


def test_exact_pvalue_matches_enumeration_oracle():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n, m = rng.integers(2, 9, size=2)
        x = rng.normal(size=n)
        y = rng.normal(loc=0.5, size=m)
        res = ks_two_sample(x, y, method=TestMethod.KS_EXACT)
        assert res.p_value == ks_exact_pvalue_oracle(x, y)
        assert res.permutations == comb(n + m, n)


def test_exact_pvalue_matches_enumeration_oracle_with_ties():
    rng = np.random.default_rng(8)
    for _ in range(25):
        n, m = rng.integers(2, 9, size=2)
        x = rng.integers(0, 3, size=n).astype(float)
        y = rng.integers(0, 3, size=m).astype(float)
        res = ks_two_sample(x, y, method=TestMethod.KS_EXACT)
        assert res.p_value == ks_exact_pvalue_oracle(x, y)


def test_fast_oracle_agrees_with_loop_oracle():
    rng = np.random.default_rng(9)
    for _ in range(10):
        n, m = rng.integers(2, 8, size=2)
        x = rng.normal(size=n)
        y = rng.integers(0, 3, size=m).astype(float)
        assert ks_exact_pvalue_oracle_fast(x, y) == ks_exact_pvalue_oracle(x, y)


def test_monte_carlo_path_for_larger_samples():
    rng = np.random.default_rng(10)
    x = rng.normal(size=30)
    y = rng.normal(size=25)
    res = ks_two_sample(x, y, method=TestMethod.KS_EXACT, permutations=500, seed=3)
    assert res.permutations == 500
    assert 1 / 501 <= res.p_value <= 1.0
    rerun = ks_two_sample(x, y, method=TestMethod.KS_EXACT, permutations=500, seed=3)
    assert rerun.p_value == res.p_value


# --- p-value behavior ----------------------------------------------------------------

def test_asymptotic_pvalue_matches_scipy_kolmogorov_sf():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = rng.normal(size=60)
        y = rng.normal(loc=rng.uniform(0, 1.5), size=80)
        res = ks_two_sample(x, y)
        lam = res.statistic * np.sqrt(60 * 80 / 140)
        assert res.p_value == pytest.approx(scipy_stats.kstwobign.sf(lam), abs=1e-10)


def test_gross_separation_rejects():
    rng = np.random.default_rng(12)
    x = rng.normal(0, 1, size=100)
    y = rng.normal(10, 1, size=100)
    assert ks_two_sample(x, y).p_value < 1e-6


def test_same_distribution_usually_accepts():
    rng = np.random.default_rng(13)
    rejected = 0
    for _ in range(40):
        x = rng.normal(size=100)
        y = rng.normal(size=100)
        if ks_two_sample(x, y).p_value <= 0.05:
            rejected += 1
    assert rejected <= 6


# --- invariants -----------------------------------------------------------------------

def test_symmetry_in_arguments():
    rng = np.random.default_rng(14)
    x = rng.normal(size=9)
    y = rng.normal(size=7)
    for method in (TestMethod.KS_ASYMPTOTIC, TestMethod.KS_EXACT):
        a = ks_two_sample(x, y, method=method)
        b = ks_two_sample(y, x, method=method)
        assert a.statistic == b.statistic
        assert a.p_value == b.p_value


def test_invariance_under_strictly_increasing_transform():
    rng = np.random.default_rng(15)
    x = rng.normal(size=20)
    y = rng.normal(size=15)
    base = ks_two_sample(x, y)
    warped = ks_two_sample(np.exp(x), np.exp(y))
    assert warped.statistic == base.statistic
    assert warped.p_value == base.p_value


def test_argument_validation():
    with pytest.raises(ArgumentError):
        ks_two_sample(np.array([]), np.array([1.0]))
    with pytest.raises(DataError):
        ks_two_sample(np.array([1.0, np.nan]), np.array([1.0]))
