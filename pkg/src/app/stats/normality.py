"""
Shapiro-Wilk W test with Royston's approximation for the coefficients and the p-value.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import math

import numpy as np
from scipy.special import ndtr, ndtri

from ..errors import ConstantSample, SampleTooSmall
from .types import TestResult

logger = logging.getLogger(__name__)

MAX_EXACT_N = 5000
SMALL_P = 1e-19

# Polynomial coefficients, highest degree first (np.polyval order).
C1 = [-2.706056, 4.434685, -2.07119, -0.147981, 0.221157, 0.0]
C2 = [-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, 0.0]
C3 = [-0.0006714, 0.025054, -0.39978, 0.544]
C4 = [-0.0020322, 0.062767, -0.77857, 1.3822]
C5 = [0.0038915, -0.083751, -0.31082, -1.5861]
C6 = [0.0030302, -0.082676, -0.4803]
G = [0.459, -2.273]


def _coefficients(n: int) -> np.ndarray:
    """Antisymmetric weights a_1..a_n (a_1 < 0 < a_n)."""
    if n == 3:
        return np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])

    m = ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    summ2 = float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)

    a_n = np.polyval(C1, rsn) + m[-1] / ssumm2
    if n > 5:
        a_n1 = np.polyval(C2, rsn) + m[-2] / ssumm2
        phi = (summ2 - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (1 - 2 * a_n**2 - 2 * a_n1**2)
        a = m / math.sqrt(phi)
        a[-1], a[-2], a[0], a[1] = a_n, a_n1, -a_n, -a_n1
    else:
        phi = (summ2 - 2 * m[-1] ** 2) / (1 - 2 * a_n**2)
        a = m / math.sqrt(phi)
        a[-1], a[0] = a_n, -a_n
    return a


def _p_value(w: float, n: int) -> float:
    if n == 3:
        # Exact distribution for three observations.
        return max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3))

    with np.errstate(divide="ignore"):
        y = np.log1p(-w)
    if n <= 11:
        gamma = np.polyval(G, n)
        if y >= gamma:
            return SMALL_P
        y = -np.log(gamma - y)
        m = np.polyval(C3, n)
        s = np.exp(np.polyval(C4, n))
    else:
        ln = math.log(n)
        m = np.polyval(C5, ln)
        s = np.exp(np.polyval(C6, ln))
    return float(ndtr(-(y - m) / s))


def shapiro_wilk(values) -> TestResult:
    """
    W statistic and p-value for the null hypothesis that `values` are normal.

    :raises SampleTooSmall: fewer than 3 values.
    :raises ConstantSample: all values equal.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = len(x)
    if n < 3:
        raise SampleTooSmall(f"Shapiro-Wilk needs at least 3 values, got {n}")
    if x[-1] == x[0]:
        raise ConstantSample("all values are equal")
    if n > MAX_EXACT_N:
        logger.warning(f"⚠️ Shapiro-Wilk with n={n} > {MAX_EXACT_N}: p-value may be inaccurate.")

    a = _coefficients(n)
    xc = x - x.mean()
    w = float(np.dot(a, x) ** 2 / np.dot(xc, xc))
    w = min(w, 1.0)
    return TestResult("shapiro_wilk", w, min(1.0, _p_value(w, n)), (n,))
