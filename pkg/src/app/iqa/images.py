"""
Grayscale image container used by the quality metrics.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import correlate1d

from ..errors import DataError, IoFailure

# ITU-R BT.601 luma weights.
LUMA = np.array([0.299, 0.587, 0.114])
HALF_BAND = np.array([0.25, 0.5, 0.25])


@dataclass(frozen=True)
class GrayImage:
    """Intensities in [0, 1], shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2 or min(self.pixels.shape) == 0:
            raise DataError(f"gray image needs a non-empty 2-D array, got shape {self.pixels.shape}")
        if not np.isfinite(self.pixels).all():
            raise DataError("gray image contains non-finite values")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        """Accepts (H, W) or (H, W, 3); uint8 input is scaled from [0, 255]."""
        arr = np.asarray(arr)
        scale = 255.0 if arr.dtype == np.uint8 else 1.0
        arr = arr.astype(np.float64) / scale
        if arr.ndim == 3:
            arr = arr[..., :3] @ LUMA
        return cls(arr)

    def downsample(self) -> "GrayImage":
        """
        Half resolution, axis by axis. An even axis averages adjacent pairs; an odd axis is
        smoothed with [1, 2, 1] / 4 (edge replicated) and sampled at even indices. Both commute
        with flips.
        """
        return GrayImage(_halve(_halve(self.pixels, 0), 1))


def _halve(pixels: np.ndarray, axis: int) -> np.ndarray:
    n = pixels.shape[axis]
    if n == 1:
        return pixels
    if n % 2 == 0:
        return (pixels.take(range(0, n, 2), axis=axis) + pixels.take(range(1, n, 2), axis=axis)) / 2.0
    smooth = correlate1d(pixels, HALF_BAND, axis=axis, mode="nearest")
    return smooth.take(range(0, n, 2), axis=axis)


def load_gray(path: Path) -> GrayImage:
    try:
        with Image.open(path) as img:
            return GrayImage.from_array(np.asarray(img.convert("RGB")))
    except OSError as e:
        raise IoFailure(f"cannot read image '{path}': {e}") from e
