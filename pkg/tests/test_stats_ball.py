"""Ball Divergence statistic against a literal triple-loop oracle."""

import numpy as np
import pytest

from pixelgan.errors import ArgumentError
from pixelgan.stats import TestMethod, ball_divergence_statistic, ball_divergence_test


def ball_divergence_oracle(x, y):
    """Naive O(n^3) version straight from the definition, closed balls."""
    n, m = len(x), len(y)

    def dist(a, b):
        return float(np.sqrt(np.sum((a - b) ** 2)))

    a_term = 0.0
    for i in range(n):
        for j in range(n):
            r = dist(x[j], x[i])
            ax = sum(dist(x[u], x[i]) <= r for u in range(n)) / n
            ay = sum(dist(y[v], x[i]) <= r for v in range(m)) / m
            a_term += (ax - ay) ** 2
    a_term /= n * n
    c_term = 0.0
    for k in range(m):
        for el in range(m):
            r = dist(y[el], y[k])
            cx = sum(dist(x[u], y[k]) <= r for u in range(n)) / n
            cy = sum(dist(y[v], y[k]) <= r for v in range(m)) / m
            c_term += (cx - cy) ** 2
    c_term /= m * m
    return a_term + c_term


def test_identical_samples_give_exact_zero():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(8, 3))
    assert ball_divergence_statistic(x, x.copy()) == 0.0


def test_statistic_matches_triple_loop_oracle():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n, m = rng.integers(2, 13, size=2)
        d = int(rng.integers(1, 5))
        x = rng.normal(size=(n, d))
        y = rng.normal(loc=rng.uniform(0, 2), size=(m, d))
        got = ball_divergence_statistic(x, y)
        want = ball_divergence_oracle(x, y)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_statistic_is_nonnegative_and_symmetric():
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = rng.normal(size=(6, 2))
        y = rng.normal(loc=0.8, size=(9, 2))
        bd = ball_divergence_statistic(x, y)
        assert bd >= 0.0
        assert ball_divergence_statistic(y, x) == pytest.approx(bd, rel=1e-12)


def test_invariance_under_rotation_and_translation():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(10, 4))
    y = rng.normal(loc=0.5, size=(12, 4))
    base = ball_divergence_statistic(x, y)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    shift = rng.normal(size=4)
    moved = ball_divergence_statistic(x @ q + shift, y @ q + shift)
    assert moved == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_argument_validation():
    x = np.zeros((1, 2))
    y = np.zeros((5, 2))
    with pytest.raises(ArgumentError):
        ball_divergence_statistic(x, y)
    with pytest.raises(ArgumentError):
        ball_divergence_statistic(np.zeros((4, 2)), np.zeros((4, 3)))
    with pytest.raises(ArgumentError):
        ball_divergence_test(np.zeros((4, 2)), np.ones((4, 2)), permutations=10)


def test_permutation_test_identical_samples_accept():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(12, 3))
    res = ball_divergence_test(x, x.copy(), permutations=99, seed=0)
    assert res.p_value == 1.0
    assert res.method is TestMethod.BALL_PERMUTATION


def test_permutation_pvalue_range_and_determinism():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(20, 6))
    y = rng.normal(size=(25, 6))
    a = ball_divergence_test(x, y, permutations=199, seed=7)
    b = ball_divergence_test(x, y, permutations=199, seed=7)
    assert a.p_value == b.p_value
    assert 1 / 200 <= a.p_value <= 1.0
    assert a.permutations == 199


def test_gross_separation_rejects():
    rng = np.random.default_rng(6)
    x = rng.normal(0.0, 1.0, size=(100, 6))
    y = rng.normal(3.0, 1.0, size=(100, 6))
    res = ball_divergence_test(x, y, permutations=999, seed=1)
    assert res.p_value <= 0.01


def test_same_distribution_usually_accepts():
    rng = np.random.default_rng(7)
    rejections = 0
    trials = 30
    for t in range(trials):
        x = rng.normal(size=(40, 3))
        y = rng.normal(size=(40, 3))
        if ball_divergence_test(x, y, permutations=99, seed=t).p_value <= 0.05:
            rejections += 1
    assert rejections <= 5
