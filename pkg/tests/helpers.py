"""Shared test utilities: goodness-of-fit checks and small oracles."""

from __future__ import annotations

import numpy as np
from scipy import stats

GOF_LEVEL = 0.01


def ks_uniform(draws: np.ndarray) -> float:
    return stats.kstest(draws, "uniform").pvalue


def ks_exponential(draws: np.ndarray, rate: float) -> float:
    return stats.kstest(draws, "expon", args=(0.0, 1.0 / rate)).pvalue


def ks_normal(draws: np.ndarray, mean: float, sd: float) -> float:
    return stats.kstest(draws, "norm", args=(mean, sd)).pvalue


def chisq_poisson(draws: np.ndarray, mean: float) -> float:
    """Chi-square GoF with tail bins merged so every expected count >= 5."""
    draws = np.asarray(draws)
    n = draws.size
    kmax = int(draws.max())
    observed = np.bincount(draws.astype(int), minlength=kmax + 1).astype(float)
    expected = stats.poisson.pmf(np.arange(kmax + 1), mean) * n
    # fold everything beyond the modeled range into the last bin
    expected[-1] += n - expected.sum()
    while expected.size > 2 and expected[-1] < 5:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        expected = expected[:-1]
        observed = observed[:-1]
    result = stats.chisquare(observed, expected)
    return float(result.pvalue)


def binom_pvalue(successes: int, n: int, p: float) -> float:
    return stats.binomtest(successes, n, p).pvalue


def grid_argmax_1d(fn, lo: float, hi: float, points: int = 100_000) -> float:
    xs = np.linspace(lo, hi, points)
    vals = np.array([fn(float(x)) for x in xs])
    return float(xs[int(np.argmax(vals))])


def brute_force_recessions(growth, min_length=3):
    """Independent run-length scan: group consecutive negatives, count long runs."""
    import itertools

    count = 0
    for negative, group in itertools.groupby(growth, key=lambda g: g < 0.0):
        if negative and len(list(group)) >= min_length:
            count += 1
    return count
