"""
Natural scene statistics: MSCN coefficients and generalized Gaussian fits.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from dataclasses import dataclass
from functools import cache

import numpy as np
from scipy.ndimage import gaussian_filter
from scipy.optimize import bisect
from scipy.special import gammaln

from ..errors import DegenerateSamples, ImageTooSmall, OneSidedSamples
from .images import GrayImage

WINDOW = 7
WINDOW_SIGMA = 7 / 6
STABILIZER = 1 / 255
MIN_SAMPLES = 100

SHAPE_MIN, SHAPE_MAX, SHAPE_STEP = 0.2, 10.0, 0.001


@dataclass(frozen=True, slots=True)
class GgdParams:
    shape: float
    scale: float


@dataclass(frozen=True, slots=True)
class AggdParams:
    shape: float
    left_scale: float
    right_scale: float
    mean: float


def local_stats(img: GrayImage) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-weighted local mean and standard deviation over a 7x7 window."""
    if img.width < WINDOW or img.height < WINDOW:
        raise ImageTooSmall(f"MSCN needs at least {WINDOW}x{WINDOW}, got {img.width}x{img.height}")
    x = img.pixels
    blur = dict(sigma=WINDOW_SIGMA, radius=WINDOW // 2, mode="nearest")
    mu = gaussian_filter(x, **blur)
    sigma = np.sqrt(np.abs(gaussian_filter(x * x, **blur) - mu * mu))
    return mu, sigma


def mscn(img: GrayImage, stabilizer: float = STABILIZER) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients (I - mu) / (sigma + C)."""
    mu, sigma = local_stats(img)
    return (img.pixels - mu) / (sigma + stabilizer)


# Generalized Gaussian ratio Gamma(1/a)Gamma(3/a)/Gamma(2/a)^2, decreasing in a.
def _ratio(shape):
    return np.exp(gammaln(1 / shape) + gammaln(3 / shape) - 2 * gammaln(2 / shape))


@cache
def _lookup() -> tuple[np.ndarray, np.ndarray]:
    shapes = np.arange(SHAPE_MIN, SHAPE_MAX + SHAPE_STEP / 2, SHAPE_STEP)
    return shapes, _ratio(shapes)


def _solve_shape(target: float) -> float:
    """Shape whose ratio equals `target`, clamped to the search grid."""
    shapes, ratios = _lookup()
    if target >= ratios[0]:
        return float(shapes[0])
    if target <= ratios[-1]:
        return float(shapes[-1])
    # ratios decrease; find the bracketing grid cell, then refine inside it.
    k = int(np.searchsorted(-ratios, -target))
    lo, hi = shapes[k - 1], shapes[k]
    return float(bisect(lambda a: _ratio(a) - target, lo, hi, xtol=1e-12))


def _check_samples(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < MIN_SAMPLES:
        raise DegenerateSamples(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if np.ptp(x) == 0:
        raise DegenerateSamples("all samples are equal")
    return x


def estimate_ggd(samples: np.ndarray) -> GgdParams:
    """Moment-matching fit of a zero-mean generalized Gaussian. Scale is the RMS of the samples."""
    x = _check_samples(samples)
    sq = np.mean(x * x)
    rho = sq / np.mean(np.abs(x)) ** 2
    return GgdParams(_solve_shape(rho), float(np.sqrt(sq)))


def estimate_aggd(samples: np.ndarray) -> AggdParams:
    """
    Moment-matching fit of an asymmetric generalized Gaussian.
    Left/right scales are the RMS of the negative and positive samples; exact zeros belong to neither side.
    """
    x = _check_samples(samples)
    left, right = x[x < 0], x[x > 0]
    if left.size == 0 or right.size == 0:
        raise OneSidedSamples(f"{left.size} negative and {right.size} positive samples")

    sigma_l = float(np.sqrt(np.mean(left * left)))
    sigma_r = float(np.sqrt(np.mean(right * right)))
    g = sigma_l / sigma_r
    r_hat = np.mean(np.abs(x)) ** 2 / np.mean(x * x)
    big_r = r_hat * (g**3 + 1) * (g + 1) / (g**2 + 1) ** 2
    shape = _solve_shape(1.0 / big_r)

    spread = np.exp(0.5 * (gammaln(1 / shape) - gammaln(3 / shape)))
    beta_l, beta_r = sigma_l * spread, sigma_r * spread
    mean = (beta_r - beta_l) * np.exp(gammaln(2 / shape) - gammaln(1 / shape))
    return AggdParams(shape, sigma_l, sigma_r, float(mean))


def pair_products(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Horizontal, vertical, main-diagonal and anti-diagonal neighbor products over the valid region."""
    m = coeffs
    return (
        m[:, :-1] * m[:, 1:],
        m[:-1, :] * m[1:, :],
        m[:-1, :-1] * m[1:, 1:],
        m[:-1, 1:] * m[1:, :-1],
    )


def nss_features(coeffs: np.ndarray) -> np.ndarray:
    """
    18 features of one coefficient field:
    [shape, variance] of the GGD fit, then (shape, mean, left variance, right variance)
    of the AGGD fit for each of H, V, D1, D2.
    """
    ggd = estimate_ggd(coeffs)
    feats = [ggd.shape, ggd.scale**2]
    for product in pair_products(coeffs):
        a = estimate_aggd(product)
        feats += [a.shape, a.mean, a.left_scale**2, a.right_scale**2]
    return np.array(feats)
