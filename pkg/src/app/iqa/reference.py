"""
Reference BRISQUE regressor, fitted on a generated distortion set.

Scenes are smooth random fields with hard-edged blobs, which give the heavy-tailed MSCN
histograms of photographs. Each scene is scored pristine and under additive Gaussian
noise, Gaussian blur and JPEG compression; targets grow with distortion severity:

    target = 5 + 90 * severity
    noise: 1 - exp(-sd / 0.1)    blur: 1 - exp(-sigma / 2)    jpeg: (100 - quality) / 100

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import io
import logging
from collections.abc import Iterator
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

from .brisque import BrisqueModel, brisque_features, fit_brisque_model
from .images import GrayImage

logger = logging.getLogger(__name__)

REFERENCE_SEED = 2026
REFERENCE_SCENES = 16
SCENE_SIZE = (128, 128)
REFERENCE_RIDGE = 0.1
NOISE_LEVELS = (0.005, 0.01, 0.02, 0.03, 0.05, 0.08, 0.15, 0.3)
BLUR_LEVELS = (0.5, 1.0, 2.0, 3.0)
JPEG_QUALITIES = (75, 40, 20, 10, 5)
PRISTINE_TARGET = 5.0
SEVERITY_SPAN = 90.0

DistortionKind = Literal["pristine", "noise", "blur", "jpeg"]


@dataclass(frozen=True)
class DistortedImage:
    scene: int
    kind: DistortionKind
    level: float
    image: GrayImage

    @property
    def target(self) -> float:
        return PRISTINE_TARGET + SEVERITY_SPAN * severity(self.kind, self.level)


def severity(kind: DistortionKind, level: float) -> float:
    """Distortion strength in [0, 1)."""
    if kind == "noise":
        return float(1.0 - np.exp(-level / 0.1))
    if kind == "blur":
        return float(1.0 - np.exp(-level / 2.0))
    if kind == "jpeg":
        return (100.0 - level) / 100.0
    return 0.0


def natural_scene(rng: np.random.Generator, size: tuple[int, int] = SCENE_SIZE) -> GrayImage:
    field = gaussian_filter(rng.normal(size=size), sigma=4)
    field = (field - field.min()) / np.ptp(field)
    yy, xx = np.mgrid[: size[0], : size[1]]
    for _ in range(4):
        cy, cx = rng.uniform(0, size[0]), rng.uniform(0, size[1])
        r = rng.uniform(8, 24)
        field = np.where((yy - cy) ** 2 + (xx - cx) ** 2 < r * r, rng.uniform(0, 1), field)
    return GrayImage(0.8 * field + 0.1 + rng.normal(0, 0.002, size=size))


def add_noise(img: GrayImage, sd: float, rng: np.random.Generator) -> GrayImage:
    return GrayImage(img.pixels + rng.normal(0, sd, size=img.pixels.shape))


def blur(img: GrayImage, sigma: float) -> GrayImage:
    return GrayImage(gaussian_filter(img.pixels, sigma=sigma, mode="nearest"))


def jpeg(img: GrayImage, quality: int) -> GrayImage:
    """Round-trips the image through an 8-bit JPEG at `quality`."""
    data = np.rint(np.clip(img.pixels, 0.0, 1.0) * 255).astype(np.uint8)
    buffer = io.BytesIO()
    Image.fromarray(data).save(buffer, format="JPEG", quality=quality)
    buffer.seek(0)
    with Image.open(buffer) as decoded:
        return GrayImage.from_array(np.asarray(decoded.convert("L")))


def distortion_set(seed: int = REFERENCE_SEED, scenes: int = REFERENCE_SCENES) -> Iterator[DistortedImage]:
    rng = np.random.default_rng(seed)
    for index in range(scenes):
        scene = natural_scene(rng)
        yield DistortedImage(index, "pristine", 0.0, scene)
        for sd in NOISE_LEVELS:
            yield DistortedImage(index, "noise", sd, add_noise(scene, sd, rng))
        for sigma in BLUR_LEVELS:
            yield DistortedImage(index, "blur", sigma, blur(scene, sigma))
        for quality in JPEG_QUALITIES:
            yield DistortedImage(index, "jpeg", quality, jpeg(scene, quality))


def fit_reference_model(
    seed: int = REFERENCE_SEED,
    scenes: int = REFERENCE_SCENES,
    kind: Literal["linear", "rbf"] = "linear",
    ridge: float = REFERENCE_RIDGE,
) -> BrisqueModel:
    samples = list(distortion_set(seed, scenes))
    features = np.stack([brisque_features(s.image) for s in samples])
    targets = np.array([s.target for s in samples])
    description = (
        f"{kind} regressor fitted on {len(samples)} generated images "
        f"({scenes} scenes, seed {seed}): pristine, noise, blur and JPEG"
    )
    model = fit_brisque_model(features, targets, kind=kind, ridge=ridge, description=description)
    logger.info(f"📐 Fitted the {kind} BRISQUE reference on {len(samples)} images.")
    return model


@lru_cache(maxsize=1)
def reference_brisque_model() -> BrisqueModel:
    return fit_reference_model()
