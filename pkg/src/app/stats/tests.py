"""
Two-group and k-group hypothesis tests: Mann-Whitney U, one-way ANOVA, Kruskal-Wallis.
All tests are two-sided.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence

import numpy as np
from scipy import stats as sps

from ..errors import EmptySample, InsufficientGroups, SampleTooSmall, ZeroWithinVariance
from .types import Sample, TestResult

logger = logging.getLogger(__name__)

EXACT_MWU_MAX_N = 8


def tie_term(values: np.ndarray) -> float:
    """Sum of t^3 - t over tie groups."""
    _, counts = np.unique(values, return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts))


def _exact_rank_sum_distribution(doubled_ranks: np.ndarray, n_small: int) -> np.ndarray:
    """
    Probability of every total of `n_small` values drawn without replacement from
    `doubled_ranks` (integers). Index = total.
    """
    top = int(np.sort(doubled_ranks)[len(doubled_ranks) - n_small :].sum())
    # dp[k, s]: number of k-subsets with sum s.
    dp = np.zeros((n_small + 1, top + 1))
    dp[0, 0] = 1.0
    for r in doubled_ranks.astype(int):
        if r <= top:
            dp[1:, r:] += dp[:-1, : top + 1 - r].copy()
    counts = dp[n_small]
    return counts / counts.sum()


def mann_whitney_u(a, b) -> TestResult:
    """
    U of the first sample with mid-ranks for ties.
    Exact permutation p-value when the smaller sample has fewer than 8 values,
    otherwise the normal approximation with tie and continuity corrections.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise EmptySample(f"Mann-Whitney U needs two non-empty samples, got sizes {n1} and {n2}")

    pooled = np.concatenate([x, y])
    ranks = sps.rankdata(pooled)
    r1 = float(ranks[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2
    u2 = n1 * n2 - u1

    if min(n1, n2) < EXACT_MWU_MAX_N:
        doubled = np.rint(2 * ranks).astype(int)
        small_first = n1 <= n2
        n_small = n1 if small_first else n2
        observed = int(doubled[:n1].sum()) if small_first else int(doubled[n1:].sum())
        dist = _exact_rank_sum_distribution(doubled, n_small)
        cdf = float(dist[: observed + 1].sum())
        sf = float(dist[observed:].sum())
        p = min(1.0, 2 * min(cdf, sf))
    else:
        n = n1 + n2
        var = n1 * n2 / 12 * ((n + 1) - tie_term(pooled) / (n * (n - 1)))
        if var <= 0:
            p = 1.0
        else:
            z = (max(u1, u2) - n1 * n2 / 2 - 0.5) / np.sqrt(var)
            p = float(min(1.0, 2 * sps.norm.sf(z)))

    return TestResult("mann_whitney_u", u1, p, (n1, n2))


def _check_groups(samples: Sequence[Sample], min_n: int):
    if len(samples) < 2:
        raise InsufficientGroups(f"need at least 2 groups, got {len(samples)}")
    for s in samples:
        if s.n < min_n:
            raise SampleTooSmall(f"group '{s.label}' has {s.n} values, need {min_n}")


def anova_oneway(samples: Sequence[Sample]) -> TestResult:
    """F = MS_between / MS_within with F(k-1, N-k) p-value."""
    _check_groups(samples, 2)
    k = len(samples)
    n_total = sum(s.n for s in samples)
    grand = np.concatenate([s.array for s in samples]).mean()

    ss_between = sum(s.n * (s.mean - grand) ** 2 for s in samples)
    ss_within = sum(float(((s.array - s.mean) ** 2).sum()) for s in samples)
    if ss_within <= 0:
        raise ZeroWithinVariance("all groups have zero within-group variance")

    f = (ss_between / (k - 1)) / (ss_within / (n_total - k))
    p = float(sps.f.sf(f, k - 1, n_total - k))
    return TestResult("anova_oneway", float(f), min(1.0, max(0.0, p)), tuple(s.n for s in samples))


def within_mean_square(samples: Sequence[Sample]) -> tuple[float, int]:
    df = sum(s.n for s in samples) - len(samples)
    ss = sum(float(((s.array - s.mean) ** 2).sum()) for s in samples)
    return ss / df, df


def kruskal_wallis(samples: Sequence[Sample]) -> TestResult:
    """H with tie correction and a chi-square(k-1) p-value. All values tied gives H = 0, p = 1."""
    _check_groups(samples, 1)
    sizes = [s.n for s in samples]
    n_total = sum(sizes)
    if n_total < 3:
        raise SampleTooSmall(f"Kruskal-Wallis needs at least 3 values in total, got {n_total}")

    pooled = np.concatenate([s.array for s in samples])
    ranks = sps.rankdata(pooled)
    bounds = np.cumsum([0, *sizes])
    rank_sums = [ranks[bounds[i] : bounds[i + 1]].sum() for i in range(len(samples))]

    h = 12.0 / (n_total * (n_total + 1)) * sum(r * r / n for r, n in zip(rank_sums, sizes, strict=True))
    h -= 3 * (n_total + 1)
    correction = 1 - tie_term(pooled) / (n_total**3 - n_total)
    if correction <= 0:
        return TestResult("kruskal_wallis", 0.0, 1.0, tuple(sizes))
    h = max(0.0, h / correction)
    p = float(sps.chi2.sf(h, len(samples) - 1))
    return TestResult("kruskal_wallis", float(h), min(1.0, p), tuple(sizes))
