"""
BRISQUE: spatial NSS features at two scales plus a loadable regressor.

Feature order (36 values): for scale in (full, half):
  [ggd_shape, ggd_variance,
   H: shape, mean, left_var, right_var,
   V: ..., D1: ..., D2: ...]

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging
from importlib import resources
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from ..errors import DimensionMismatch, ImageTooSmall, IoFailure, ModelFileInvalid
from .images import GrayImage
from .nss import mscn, nss_features

logger = logging.getLogger(__name__)

FEATURE_DIM = 36
MIN_SIDE = 32
SCORE_RANGE = (0.0, 100.0)
REFERENCE_MODEL = "brisque_reference.json"
MODEL_VERSION = 1


def brisque_features(img: GrayImage) -> np.ndarray:
    if img.width < MIN_SIDE or img.height < MIN_SIDE:
        raise ImageTooSmall(f"BRISQUE needs at least {MIN_SIDE}x{MIN_SIDE}, got {img.width}x{img.height}")
    full = nss_features(mscn(img))
    half = nss_features(mscn(img.downsample()))
    return np.concatenate([full, half])


class BrisqueModel(BaseModel):
    """
    Regressor over features scaled to [-1, 1] with the stored per-feature ranges.
    linear: score = weights . s + intercept
    rbf:    score = sum_i dual_coefs[i] * exp(-gamma * |s - sv_i|^2) + intercept
    """

    version: int = MODEL_VERSION
    kind: Literal["linear", "rbf"]
    feature_min: list[float]
    feature_max: list[float]
    intercept: float
    weights: list[float] | None = None
    support_vectors: list[list[float]] | None = None
    dual_coefs: list[float] | None = None
    gamma: float | None = None
    description: str = ""

    @model_validator(mode="after")
    def _check_shapes(self):
        dim = len(self.feature_min)
        if len(self.feature_max) != dim:
            raise ValueError("feature_min and feature_max lengths differ")
        if any(hi <= lo for lo, hi in zip(self.feature_min, self.feature_max, strict=True)):
            raise ValueError("every feature range needs max > min")
        if self.kind == "linear":
            if self.weights is None or len(self.weights) != dim:
                raise ValueError("linear model needs one weight per feature")
        else:
            if not self.support_vectors or self.dual_coefs is None or self.gamma is None:
                raise ValueError("rbf model needs support_vectors, dual_coefs and gamma")
            if len(self.dual_coefs) != len(self.support_vectors):
                raise ValueError("one dual coefficient per support vector")
            if any(len(sv) != dim for sv in self.support_vectors):
                raise ValueError("support vector dimension differs from the feature ranges")
        return self

    @property
    def dim(self) -> int:
        return len(self.feature_min)

    def scale(self, features: np.ndarray) -> np.ndarray:
        lo, hi = np.asarray(self.feature_min), np.asarray(self.feature_max)
        return 2.0 * (features - lo) / (hi - lo) - 1.0

    def raw_score(self, features: np.ndarray) -> float:
        s = self.scale(features)
        if self.kind == "linear":
            return float(np.dot(self.weights, s) + self.intercept)
        sv = np.asarray(self.support_vectors)
        k = np.exp(-self.gamma * ((sv - s) ** 2).sum(axis=1))
        return float(np.dot(self.dual_coefs, k) + self.intercept)


def load_brisque_model(path: Path | None = None) -> BrisqueModel:
    """
    Reads a regressor file. None loads the bundled reference file when one is installed,
    otherwise the reference is fitted on the generated distortion set (once per process).
    """
    if path is None:
        bundled = resources.files("app.iqa").joinpath("models", REFERENCE_MODEL)
        if not bundled.is_file():
            from .reference import reference_brisque_model

            return reference_brisque_model()
        label, read = REFERENCE_MODEL, bundled.read_text
    else:
        label, read = str(path), Path(path).read_text
    try:
        text = read()
    except OSError as e:
        raise IoFailure(f"cannot read BRISQUE model '{label}': {e}") from e
    try:
        return BrisqueModel.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ModelFileInvalid(f"BRISQUE model '{label}': {e}") from e


def brisque_score(features: np.ndarray, model: BrisqueModel) -> float:
    """Regression score clamped to [0, 100]; lower is better."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.dim,) or model.dim != FEATURE_DIM:
        raise DimensionMismatch(f"expected {FEATURE_DIM} features, got {features.shape} for a {model.dim}-dim model")
    return float(np.clip(model.raw_score(features), *SCORE_RANGE))


def fit_brisque_model(
    features: np.ndarray,
    targets: np.ndarray,
    kind: Literal["linear", "rbf"] = "linear",
    gamma: float = 0.05,
    ridge: float = 1e-3,
    description: str = "",
) -> BrisqueModel:
    """
    Fits a regressor from feature vectors to subjective scores.
    linear: ridge regression on scaled features, intercept unpenalized.
    rbf: kernel ridge regression with every training vector as a support vector and the
    target mean as intercept.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != FEATURE_DIM or len(y) != len(x):
        raise DimensionMismatch(f"features {x.shape} and targets {y.shape} do not line up")

    lo, hi = x.min(axis=0), x.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)
    scaled = 2.0 * (x - lo) / (hi - lo) - 1.0
    common = dict(feature_min=lo.tolist(), feature_max=hi.tolist(), description=description)

    if kind == "linear":
        design = np.column_stack([scaled, np.ones(len(x))])
        penalty = ridge * np.diag([1.0] * FEATURE_DIM + [0.0])
        coef = np.linalg.solve(design.T @ design + penalty, design.T @ y)
        return BrisqueModel(kind="linear", weights=coef[:-1].tolist(), intercept=float(coef[-1]), **common)

    sq = ((scaled[:, None, :] - scaled[None, :, :]) ** 2).sum(axis=2)
    kernel = np.exp(-gamma * sq)
    intercept = float(y.mean())
    dual = np.linalg.solve(kernel + ridge * np.eye(len(x)), y - intercept)
    return BrisqueModel(
        kind="rbf",
        support_vectors=scaled.tolist(),
        dual_coefs=dual.tolist(),
        gamma=gamma,
        intercept=intercept,
        **common,
    )


def save_brisque_model(model: BrisqueModel, path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(model.model_dump_json(indent=2, exclude_none=True) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write BRISQUE model '{path}': {e}") from e
