"""
Mask rasterization, crop standardization and mask PNG I/O.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import EmptyCrop, IoFailure, ZeroDimension
from .labels import bbox_from_polygon
from .types import BitMask, PolygonAnnotation

logger = logging.getLogger(__name__)

DEFAULT_TILE_SIZE = 512
MASK_ON = 255


def rasterize_polygon(polygon: PolygonAnnotation, width: int, height: int) -> BitMask:
    """
    Even-odd fill of `polygon` sampled at pixel centers.

    :param polygon: Polygon in normalized coordinates.
    :param width: Output width in pixels.
    :param height: Output height in pixels.
    """
    if width <= 0 or height <= 0:
        raise ZeroDimension(f"cannot rasterize into {width}x{height}")

    px = (np.arange(width) + 0.5) / width
    py = (np.arange(height) + 0.5) / height
    gx, gy = np.meshgrid(px, py)

    inside = np.zeros((height, width), dtype=bool)
    verts = polygon.as_array()
    x0, y0 = verts[:, 0], verts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)

    # Ray casting towards +x; horizontal edges never toggle.
    for xa, ya, xb, yb in zip(x0, y0, x1, y1, strict=True):
        if ya == yb:
            continue
        straddles = (ya > gy) != (yb > gy)
        x_cross = xa + (gy - ya) * (xb - xa) / (yb - ya)
        inside ^= straddles & (gx < x_cross)

    return BitMask(width, height, inside)


def _scaled_size(width: int, height: int, target: int) -> tuple[int, int]:
    longest = max(width, height)
    if longest <= target:
        return width, height
    # Round half up in exact integer arithmetic.
    new_w = (2 * width * target + longest) // (2 * longest)
    new_h = (2 * height * target + longest) // (2 * longest)
    return max(1, new_w), max(1, new_h)


def _resize(arr: np.ndarray, size: tuple[int, int], nearest: bool) -> np.ndarray:
    resample = Image.Resampling.NEAREST if nearest else Image.Resampling.LANCZOS
    if arr.dtype == np.uint8:
        return np.asarray(Image.fromarray(arr).resize(size, resample))
    # Float tiles go channel by channel through 32-bit float mode.
    if arr.ndim == 2:
        return np.asarray(Image.fromarray(arr.astype(np.float32)).resize(size, resample))
    channels = [_resize(arr[..., c], size, nearest) for c in range(arr.shape[2])]
    return np.stack(channels, axis=-1)


def pad_to_square(crop: BitMask | np.ndarray, target: int = DEFAULT_TILE_SIZE) -> BitMask | np.ndarray:
    """
    Standardizes a crop to target x target.
    Content that fits is centered unscaled; larger content is downscaled so its longest
    side equals `target` (aspect preserved, nearest-neighbor for masks). The rest is zero.

    :param crop: A BitMask or an image tile of shape (H, W) or (H, W, C).
    :param target: Side length of the square output.
    :return: Same kind as the input.
    """
    is_mask = isinstance(crop, BitMask)
    arr = crop.bits.astype(np.uint8) * MASK_ON if is_mask else np.asarray(crop)

    if arr.ndim < 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyCrop(f"crop has shape {arr.shape}")

    height, width = arr.shape[:2]
    new_w, new_h = _scaled_size(width, height, target)
    if (new_w, new_h) != (width, height):
        arr = _resize(arr, (new_w, new_h), nearest=is_mask)

    out = np.zeros((target, target) + arr.shape[2:], dtype=arr.dtype)
    off_x = (target - new_w) // 2
    off_y = (target - new_h) // 2
    out[off_y : off_y + new_h, off_x : off_x + new_w] = arr

    if is_mask:
        return BitMask(target, target, out > 0)
    return out


def extract_masked_crop(
    image: np.ndarray, polygon: PolygonAnnotation, target: int = DEFAULT_TILE_SIZE
) -> tuple[np.ndarray, BitMask]:
    """
    Cuts one instance out of `image`: crop to the polygon's bounding rectangle, zero the
    pixels outside the polygon, then pad both tile and mask to a target x target square.
    """
    height, width = image.shape[:2]
    full = rasterize_polygon(polygon, width, height)

    box = bbox_from_polygon(polygon)
    x1, y1, x2, y2 = box.xyxy()
    c0, c1 = int(np.floor(x1 * width)), int(np.ceil(x2 * width))
    r0, r1 = int(np.floor(y1 * height)), int(np.ceil(y2 * height))
    if c1 <= c0 or r1 <= r0:
        raise EmptyCrop(f"polygon covers no pixels in a {width}x{height} image")

    bits = full.bits[r0:r1, c0:c1]
    tile = image[r0:r1, c0:c1].copy()
    tile[~bits] = 0

    mask = BitMask(bits.shape[1], bits.shape[0], bits)
    return pad_to_square(tile, target), pad_to_square(mask, target)


def write_mask_png(mask: BitMask, path: Path):
    """Writes an 8-bit single-channel PNG with {0, 255} values."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(mask.bits.astype(np.uint8) * MASK_ON).save(path)
    except OSError as e:
        raise IoFailure(f"cannot write mask '{path}': {e}") from e


def read_mask_png(path: Path) -> BitMask:
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"))
    except OSError as e:
        raise IoFailure(f"cannot read mask '{path}': {e}") from e
    return BitMask(arr.shape[1], arr.shape[0], arr > 127)


def read_rgb(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as e:
        raise IoFailure(f"cannot read image '{path}': {e}") from e


def write_rgb(arr: np.ndarray, path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(arr).save(path)
    except OSError as e:
        raise IoFailure(f"cannot write image '{path}': {e}") from e
