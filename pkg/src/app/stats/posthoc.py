"""
Post-hoc pairwise procedures: Tukey-Kramer HSD and Dunn with Bonferroni adjustment.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import math
from collections.abc import Sequence
from functools import cache

import numpy as np
from scipy import integrate
from scipy import stats as sps
from scipy.special import gammaln, ndtr

from ..errors import ZeroWithinVariance
from .tests import _check_groups, tie_term, within_mean_square
from .types import PairwiseMatrix, Sample

logger = logging.getLogger(__name__)

INNER_NODES = 200
INNER_LIMIT = 8.5
OUTER_SPREAD = 12.0


@cache
def _gauss_legendre() -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(INNER_NODES)
    return nodes * INNER_LIMIT, weights * INNER_LIMIT


def _range_cdf_normal(w: float, k: int) -> float:
    """P(range of k iid standard normals <= w) = k * int phi(z) [Phi(z) - Phi(z - w)]^(k-1) dz."""
    if w <= 0:
        return 0.0
    z, wt = _gauss_legendre()
    phi = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    inner = np.clip(ndtr(z) - ndtr(z - w), 0.0, 1.0) ** (k - 1)
    return float(min(1.0, k * np.sum(wt * phi * inner)))


def studentized_range_sf(q: float, k: int, df: float) -> float:
    """
    P(Q > q) for the studentized range with k groups and df degrees of freedom.
    Integrates the normal-range tail over the density of s = sqrt(chi2_df / df).
    """
    if q <= 0:
        return 1.0

    log_norm = (df / 2) * math.log(df) - gammaln(df / 2) - (df / 2 - 1) * math.log(2)

    def integrand(s: float) -> float:
        if s <= 0:
            return 0.0
        log_density = log_norm + (df - 1) * math.log(s) - df * s * s / 2
        return math.exp(log_density) * (1.0 - _range_cdf_normal(q * s, k))

    spread = OUTER_SPREAD / math.sqrt(2 * df)
    lo, hi = max(0.0, 1.0 - spread), 1.0 + spread
    value, _ = integrate.quad(integrand, lo, hi, points=[1.0], limit=200, epsabs=1e-10)
    return float(min(1.0, max(0.0, value)))


def _matrix(method: str, samples: Sequence[Sample], p: np.ndarray) -> PairwiseMatrix:
    p = np.minimum(1.0, np.maximum(0.0, (p + p.T) / 2))
    np.fill_diagonal(p, 1.0)
    return PairwiseMatrix(method, tuple(s.label for s in samples), p, tuple(s.mean for s in samples))


def tukey_hsd(samples: Sequence[Sample]) -> PairwiseMatrix:
    """
    Tukey-Kramer: q = |m_i - m_j| / sqrt(MS_within / 2 * (1/n_i + 1/n_j)),
    p from the studentized range with k groups and N - k degrees of freedom.
    """
    _check_groups(samples, 2)
    msw, df = within_mean_square(samples)
    if msw <= 0:
        raise ZeroWithinVariance("all groups have zero within-group variance")

    k = len(samples)
    p = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            se = math.sqrt(msw / 2 * (1 / samples[i].n + 1 / samples[j].n))
            q = abs(samples[i].mean - samples[j].mean) / se
            p[i, j] = p[j, i] = studentized_range_sf(q, k, df)
    return _matrix("tukey_hsd", samples, p)


def dunn_raw(samples: Sequence[Sample]) -> np.ndarray:
    """
    Unadjusted two-sided Dunn p-values: z on mean-rank differences with the
    tie-corrected variance. Pairs with zero variance get p = 1.
    """
    _check_groups(samples, 1)
    k = len(samples)
    sizes = np.array([s.n for s in samples])
    pooled = np.concatenate([s.array for s in samples])
    n_total = len(pooled)
    ranks = sps.rankdata(pooled)
    bounds = np.cumsum([0, *sizes])
    mean_ranks = [ranks[bounds[i] : bounds[i + 1]].mean() for i in range(k)]

    base_var = n_total * (n_total + 1) / 12 - tie_term(pooled) / (12 * (n_total - 1)) if n_total > 1 else 0.0

    p = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            var = base_var * (1 / sizes[i] + 1 / sizes[j])
            if var <= 0:
                continue
            z = abs(mean_ranks[i] - mean_ranks[j]) / math.sqrt(var)
            p[i, j] = p[j, i] = 2 * sps.norm.sf(z)
    return p


def dunn_bonferroni(samples: Sequence[Sample]) -> PairwiseMatrix:
    """Dunn's test with raw p multiplied by the number of pairs k(k-1)/2, capped at 1."""
    raw = dunn_raw(samples)
    k = len(samples)
    m = k * (k - 1) // 2
    return _matrix("dunn_bonferroni", samples, np.minimum(1.0, raw * m))
