"""
NIQE: distance between an image's patch-feature Gaussian and a model fitted on pristine images.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ValidationError
from scipy import linalg

from ..errors import DataError, DimensionMismatch, InsufficientPatches, IoFailure, ModelFileInvalid, SingularCovariance
from .images import GrayImage
from .nss import STABILIZER, local_stats, nss_features

logger = logging.getLogger(__name__)

DEFAULT_PATCH_SIZE = 96
DEFAULT_SHARPNESS_FRAC = 0.75
MIN_FIT_PATCHES = 50
EIGEN_FLOOR = 1e-10
FEATURE_DIM = 36
MODEL_VERSION = 1


@dataclass(frozen=True)
class NiqeModel:
    mean: np.ndarray
    cov: np.ndarray
    patch_size: int = DEFAULT_PATCH_SIZE
    sharpness_frac: float = DEFAULT_SHARPNESS_FRAC

    def __post_init__(self):
        d = self.mean.shape[0]
        if self.mean.shape != (d,) or self.cov.shape != (d, d):
            raise DimensionMismatch(f"mean {self.mean.shape} and covariance {self.cov.shape} disagree")
        if self.patch_size < 2 or self.patch_size % 2:
            raise DataError(f"patch size must be even and >= 2, got {self.patch_size}")
        if not 0.0 < self.sharpness_frac <= 1.0:
            raise DataError(f"sharpness fraction must lie in (0, 1], got {self.sharpness_frac}")


def _patch_grid(shape: tuple[int, int], size: int):
    rows, cols = shape[0] // size, shape[1] // size
    for r in range(rows):
        for c in range(cols):
            yield r * size, c * size


def patch_features(img: GrayImage, patch_size: int) -> tuple[np.ndarray, np.ndarray]:
    """
    36 NSS features and the sharpness of every non-overlapping patch.
    Scale 2 uses the half-resolution image with half-size patches at the same location.
    Patches whose fits fail (flat or one-sided content) are skipped.

    :return: (features of shape (n, 36), sharpness of shape (n,))
    """
    mu, sigma = local_stats(img)
    coeffs = (img.pixels - mu) / (sigma + STABILIZER)
    small = img.downsample()
    mu2, sigma2 = local_stats(small)
    coeffs2 = (small.pixels - mu2) / (sigma2 + STABILIZER)

    half = patch_size // 2
    feats, sharp = [], []
    for y, x in _patch_grid(coeffs.shape, patch_size):
        try:
            f1 = nss_features(coeffs[y : y + patch_size, x : x + patch_size])
            f2 = nss_features(coeffs2[y // 2 : y // 2 + half, x // 2 : x // 2 + half])
        except DataError:
            continue
        feats.append(np.concatenate([f1, f2]))
        sharp.append(float(sigma[y : y + patch_size, x : x + patch_size].mean()))

    if not feats:
        return np.zeros((0, FEATURE_DIM)), np.zeros(0)
    return np.array(feats), np.array(sharp)


def _regularize(cov: np.ndarray) -> np.ndarray:
    cov = (cov + cov.T) / 2
    vals, vecs = np.linalg.eigh(cov)
    fixed = (vecs * np.maximum(vals, EIGEN_FLOOR)) @ vecs.T
    return (fixed + fixed.T) / 2


def niqe_fit(
    corpus: Sequence[GrayImage],
    patch_size: int = DEFAULT_PATCH_SIZE,
    sharpness_frac: float = DEFAULT_SHARPNESS_FRAC,
) -> NiqeModel:
    """
    Fits the pristine multivariate Gaussian.
    Per image, only patches with sharpness >= sharpness_frac * (sharpest patch) and > 0 are kept.
    """
    selected = []
    for img in corpus:
        feats, sharp = patch_features(img, patch_size)
        if not len(sharp) or sharp.max() <= 0:
            continue
        keep = (sharp >= sharpness_frac * sharp.max()) & (sharp > 0)
        selected.append(feats[keep])

    pooled = np.concatenate(selected) if selected else np.zeros((0, FEATURE_DIM))
    if len(pooled) < MIN_FIT_PATCHES:
        raise InsufficientPatches(f"{len(pooled)} sharp patches selected, need {MIN_FIT_PATCHES}")

    cov = _regularize(np.cov(pooled, rowvar=False))
    logger.info(f"📐 NIQE model fitted on {len(pooled)} patches from {len(corpus)} images")
    return NiqeModel(pooled.mean(axis=0), cov, patch_size, sharpness_frac)


def niqe_score(img: GrayImage, model: NiqeModel) -> float:
    """sqrt(d' ((S_model + S_image) / 2)^-1 d) with d the difference of means; >= 0, lower is better."""
    feats, _ = patch_features(img, model.patch_size)
    if len(feats) == 0:
        raise InsufficientPatches(f"no usable {model.patch_size}px patch in a {img.width}x{img.height} image")
    if feats.shape[1] != model.mean.shape[0]:
        raise DimensionMismatch(f"image features have {feats.shape[1]} dims, model has {model.mean.shape[0]}")

    cov = np.cov(feats, rowvar=False) if len(feats) > 1 else np.zeros_like(model.cov)
    pooled = (model.cov + cov) / 2
    d = feats.mean(axis=0) - model.mean
    try:
        sol = linalg.solve(pooled, d, assume_a="sym")
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularCovariance(f"pooled covariance is not invertible: {e}") from e
    return float(np.sqrt(max(float(d @ sol), 0.0)))


class _NiqeModelFile(BaseModel):
    version: int
    patch_size: int
    sharpness_frac: float
    mean: list[float]
    cov: list[list[float]]


def save_niqe_model(model: NiqeModel, path: Path):
    doc = _NiqeModelFile(
        version=MODEL_VERSION,
        patch_size=model.patch_size,
        sharpness_frac=model.sharpness_frac,
        mean=model.mean.tolist(),
        cov=model.cov.tolist(),
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(doc.model_dump_json(indent=2) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write NIQE model '{path}': {e}") from e


def load_niqe_model(path: Path) -> NiqeModel:
    try:
        doc = _NiqeModelFile.model_validate(json.loads(path.read_text()))
    except OSError as e:
        raise IoFailure(f"cannot read NIQE model '{path}': {e}") from e
    except (json.JSONDecodeError, ValidationError) as e:
        raise ModelFileInvalid(f"NIQE model '{path}': {e}") from e
    if doc.version != MODEL_VERSION:
        raise ModelFileInvalid(f"NIQE model '{path}' has version {doc.version}, expected {MODEL_VERSION}")
    try:
        return NiqeModel(np.array(doc.mean), np.array(doc.cov), doc.patch_size, doc.sharpness_frac)
    except DataError as e:
        raise ModelFileInvalid(f"NIQE model '{path}': {e}") from e
