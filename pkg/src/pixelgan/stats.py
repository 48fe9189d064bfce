"""Nonparametric two-sample tests and classification metrics.

Per-band equality of marginals is checked with the two-sample
Kolmogorov-Smirnov test (asymptotic or exact-permutation p-values), joint
equality with the multivariate Ball Divergence permutation test, and
classifier quality with confusion-matrix metrics plus Cohen's kappa.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb

import numpy as np

from .errors import ArgumentError, DataError


class TestMethod(str, Enum):
    KS_ASYMPTOTIC = "ks_asymptotic"
    KS_EXACT = "ks_exact"
    BALL_PERMUTATION = "ball_permutation"


@dataclass
class TestResult:
    statistic: float
    p_value: float
    method: TestMethod
    n: int
    m: int
    permutations: int | None = None

    def to_dict(self) -> dict:
        d = {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method.value,
            "n": self.n,
            "m": self.m,
        }
        if self.permutations is not None:
            d["permutations"] = self.permutations
        return d


# --- Kolmogorov-Smirnov -------------------------------------------------------

def _check_sample(v: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise ArgumentError(f"{name} is empty")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name} contains non-finite values")
    return v


def _ks_statistic(x: np.ndarray, y: np.ndarray) -> float:
    """sup_t |Fx(t) - Fy(t)| over the pooled sample points."""
    xs = np.sort(x)
    ys = np.sort(y)
    pts = np.union1d(xs, ys)
    fx = np.searchsorted(xs, pts, side="right") / xs.size
    fy = np.searchsorted(ys, pts, side="right") / ys.size
    return float(np.max(np.abs(fx - fy)))


def _ks_numerator(x_sorted: np.ndarray, y_sorted: np.ndarray, pts: np.ndarray) -> int:
    """Integer numerator of the KS statistic: max |cx*m - cy*n| over pooled points.

    Working with integers makes tie comparisons in permutation counts exact.
    """
    n, m = x_sorted.size, y_sorted.size
    cx = np.searchsorted(x_sorted, pts, side="right")
    cy = np.searchsorted(y_sorted, pts, side="right")
    return int(np.max(np.abs(cx * m - cy * n)))


def _kolmogorov_sf(lam: float) -> float:
    """Asymptotic survival function 2*sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lam^2)."""
    if lam <= 1e-4:
        return 1.0
    kmax = min(1_000_000, max(5, int(np.ceil(6.0 / lam))))
    k = np.arange(1, kmax + 1)
    terms = np.exp(-2.0 * (k * lam) ** 2)
    terms[1::2] *= -1.0
    return float(np.clip(2.0 * terms.sum(), 0.0, 1.0))


def _ks_exact_enumeration(pooled_sorted: np.ndarray, n: int, m: int, d_num: int) -> float:
    """Exact permutation p-value over all C(n+m, n) splits of the pooled sample.

    Counts splits whose KS numerator stays strictly below the observed one by
    dynamic programming over tie groups; the complement gives the p-value.
    Exact rational arithmetic throughout (Python ints).
    """
    total_points = n + m
    # run lengths of equal pooled values
    groups: list[int] = []
    i = 0
    while i < total_points:
        j = i
        while j < total_points and pooled_sorted[j] == pooled_sorted[i]:
            j += 1
        groups.append(j - i)
        i = j
    # dp[i] = weighted number of prefixes using i x-labels with all boundary
    # deviations |i*m - j*n| strictly below d_num
    dp = [0] * (n + 1)
    dp[0] = 1
    used = 0
    for c in groups:
        new = [0] * (n + 1)
        hi = min(used, n)
        for i_x in range(hi + 1):
            w = dp[i_x]
            if not w:
                continue
            for k in range(min(c, n - i_x) + 1):
                new[i_x + k] += w * comb(c, k)
        used += c
        for i_x in range(n + 1):
            j_y = used - i_x
            if j_y < 0 or j_y > m:
                new[i_x] = 0
            elif abs(i_x * m - j_y * n) >= d_num:
                new[i_x] = 0
        dp = new
    surviving = dp[n]
    total = comb(n + m, n)
    return float((total - surviving) / total)


def ks_two_sample(
    x: np.ndarray,
    y: np.ndarray,
    method: str | TestMethod = TestMethod.KS_ASYMPTOTIC,
    permutations: int = 10_000,
    seed: int = 0,
) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test.

    method "ks_asymptotic": p-value from the Kolmogorov distribution at
    lambda = D * sqrt(n*m/(n+m)). method "ks_exact": exhaustive permutation
    enumeration when n + m <= 20, otherwise seeded Monte-Carlo permutation
    with the given replicate count. Symmetric in (x, y).
    """
    x = _check_sample(x, "x")
    y = _check_sample(y, "y")
    method = TestMethod(method)
    if method is TestMethod.BALL_PERMUTATION:
        raise ArgumentError("ball_permutation is not a KS method")
    n, m = x.size, y.size
    xs, ys = np.sort(x), np.sort(y)
    pts = np.union1d(xs, ys)
    statistic = _ks_statistic(x, y)
    d_num = _ks_numerator(xs, ys, pts)

    if method is TestMethod.KS_ASYMPTOTIC:
        lam = statistic * np.sqrt(n * m / (n + m))
        return TestResult(statistic, _kolmogorov_sf(lam), method, n, m)

    pooled_sorted = np.sort(np.concatenate([x, y]))
    if n + m <= 20:
        p = _ks_exact_enumeration(pooled_sorted, n, m, d_num)
        return TestResult(statistic, p, method, n, m, permutations=comb(n + m, n))
    if permutations < 1:
        raise ArgumentError("permutations must be >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(permutations):
        perm = rng.permutation(pooled_sorted)
        px = np.sort(perm[:n])
        py = np.sort(perm[n:])
        ppts = np.union1d(px, py)
        if _ks_numerator(px, py, ppts) >= d_num:
            hits += 1
    p = (1 + hits) / (permutations + 1)
    return TestResult(statistic, p, method, n, m, permutations=permutations)


# --- Ball Divergence ----------------------------------------------------------

def _check_matrix(v: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 2:
        raise ArgumentError(f"{name} must be a 2-D sample matrix")
    if v.shape[0] < 2:
        raise ArgumentError(f"{name} needs at least 2 rows")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name} contains non-finite values")
    return v


def _pairwise_distances(z: np.ndarray) -> np.ndarray:
    diff = z[:, None, :] - z[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


class _BallEngine:
    """Precomputed pooled-distance orderings for fast relabeled statistics.

    The statistic only depends on, per center, how many points of each label
    fall inside every closed ball; ball membership is fixed by the pooled
    distances, so permuting labels never touches the distance matrix.
    """

    def __init__(self, pooled: np.ndarray):
        dist = _pairwise_distances(pooled)
        size = dist.shape[0]
        self.order = np.argsort(dist, axis=0, kind="stable")
        sorted_cols = np.take_along_axis(dist, self.order, axis=0)
        # inclusive rank: rank[u, c] = #{v : d(v, c) <= d(u, c)}
        rank = np.empty_like(self.order)
        for c in range(size):
            rank[:, c] = np.searchsorted(sorted_cols[:, c], dist[:, c], side="right")
        self.rank = rank

    def statistic(self, x_labels: np.ndarray, n: int, m: int) -> float:
        ordered = x_labels[self.order]
        cum_x = np.cumsum(ordered, axis=0)
        in_ball_x = np.take_along_axis(cum_x, self.rank - 1, axis=0)
        in_ball_y = self.rank - in_ball_x
        prop_diff = in_ball_x / n - in_ball_y / m
        ix = np.flatnonzero(x_labels)
        iy = np.flatnonzero(~x_labels)
        a_term = float(np.mean(prop_diff[np.ix_(ix, ix)] ** 2))
        c_term = float(np.mean(prop_diff[np.ix_(iy, iy)] ** 2))
        return a_term + c_term


def ball_divergence_statistic(x: np.ndarray, y: np.ndarray) -> float:
    """Ball Divergence between two multivariate samples (Euclidean balls).

    Sum over both samples of the mean squared difference between the
    within-sample and cross-sample proportions of points falling in every
    closed ball centered at a sample point with radius to another point of
    the same sample. Zero iff the empirical ball proportions coincide.
    """
    x = _check_matrix(x, "x")
    y = _check_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ArgumentError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    n, m = x.shape[0], y.shape[0]
    engine = _BallEngine(np.vstack([x, y]))
    labels = np.zeros(n + m, dtype=bool)
    labels[:n] = True
    return engine.statistic(labels, n, m)


def ball_divergence_test(
    x: np.ndarray, y: np.ndarray, permutations: int = 999, seed: int = 0
) -> TestResult:
    """Permutation test of joint-distribution equality via Ball Divergence.

    p = (1 + #{permuted BD >= observed BD}) / (permutations + 1), permuting
    pooled row labels with sample sizes held fixed.
    """
    x = _check_matrix(x, "x")
    y = _check_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ArgumentError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if permutations < 99:
        raise ArgumentError("permutations must be >= 99")
    n, m = x.shape[0], y.shape[0]
    engine = _BallEngine(np.vstack([x, y]))
    labels = np.zeros(n + m, dtype=bool)
    labels[:n] = True
    observed = engine.statistic(labels, n, m)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(permutations):
        if engine.statistic(rng.permutation(labels), n, m) >= observed:
            hits += 1
    p = (1 + hits) / (permutations + 1)
    return TestResult(observed, p, TestMethod.BALL_PERMUTATION, n, m, permutations=permutations)


# --- confusion-matrix metrics ---------------------------------------------------

@dataclass
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int
    positive_label: str = "builtup"

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def metrics(cm: ConfusionMatrix) -> dict[str, float | None]:
    """Sensitivity, specificity, PPV, NPV, and accuracy from pixel counts.

    A metric whose denominator is zero is reported as None (undefined).
    """
    if cm.total == 0:
        raise DataError("all-zero confusion matrix")

    def ratio(num: int, den: int) -> float | None:
        return num / den if den else None

    return {
        "sensitivity": ratio(cm.tp, cm.tp + cm.fn),
        "specificity": ratio(cm.tn, cm.tn + cm.fp),
        "ppv": ratio(cm.tp, cm.tp + cm.fp),
        "npv": ratio(cm.tn, cm.tn + cm.fn),
        "accuracy": (cm.tp + cm.tn) / cm.total,
    }


def cohen_kappa(cm: ConfusionMatrix) -> float | None:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e); None if undefined."""
    if cm.total == 0:
        raise DataError("all-zero confusion matrix")
    total = cm.total
    p_o = (cm.tp + cm.tn) / total
    p_e = ((cm.tp + cm.fp) * (cm.tp + cm.fn) + (cm.fn + cm.tn) * (cm.fp + cm.tn)) / total**2
    if p_e == 1.0:
        # degenerate marginals: kappa is 1 for a perfect matrix, else undefined
        return 1.0 if cm.fn == 0 and cm.fp == 0 else None
    return (p_o - p_e) / (1.0 - p_e)


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    sensitivity: float | None
    specificity: float | None
    ppv: float | None
    npv: float | None
    accuracy: float
    kappa: float | None

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "EvalReport":
        m = metrics(cm)
        return cls(
            confusion=cm,
            sensitivity=m["sensitivity"],
            specificity=m["specificity"],
            ppv=m["ppv"],
            npv=m["npv"],
            accuracy=m["accuracy"],
            kappa=cohen_kappa(cm),
        )

    def to_dict(self) -> dict:
        return {
            "confusion": {
                "tp": self.confusion.tp,
                "fn": self.confusion.fn,
                "fp": self.confusion.fp,
                "tn": self.confusion.tn,
                "positive_label": self.confusion.positive_label,
            },
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "ppv": self.ppv,
            "npv": self.npv,
            "accuracy": self.accuracy,
            "kappa": self.kappa,
        }
