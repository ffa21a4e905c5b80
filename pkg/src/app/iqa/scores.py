"""
Per-image quality scores: externally computed deep-metric files, native score CSVs,
and the real-vs-synthetic group comparison.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, fields
from enum import StrEnum
from pathlib import Path

import numpy as np
import pandas as pd

from ..annotations.types import Provenance
from ..errors import DataError, InsufficientPatches, IoFailure, MalformedRow, RangeViolation
from ..stats.tests import mann_whitney_u
from .brisque import BrisqueModel, brisque_features, brisque_score
from .images import load_gray
from .niqe import NiqeModel, niqe_score

logger = logging.getLogger(__name__)

EXTERNAL_COLUMNS = ["image_id", "metric", "property", "value"]
SCORE_COLUMNS = ["image_id", "metric", "value", "provenance"]


class ExternalMetric(StrEnum):
    DBCNN = "DBCNN"
    HYPERIQA = "HyperIQA"
    CLIPIQA = "CLIPIQA"


class ClipProperty(StrEnum):
    BRIGHTNESS = "brightness"
    NOISINESS = "noisiness"
    SHARPNESS = "sharpness"
    COMPLEXITY = "complexity"
    NATURALNESS = "naturalness"
    REALISM = "realism"


# DBCNN is stored as given.
VALUE_RANGES: dict[ExternalMetric, tuple[float, float]] = {
    ExternalMetric.CLIPIQA: (0.0, 1.0),
    ExternalMetric.HYPERIQA: (0.0, 100.0),
}


@dataclass(frozen=True, slots=True)
class ExternalScore:
    image_id: str
    metric: ExternalMetric
    property: ClipProperty | None
    value: float

    @property
    def key(self) -> str:
        return f"{self.metric}:{self.property}" if self.property else str(self.metric)


@dataclass(frozen=True, slots=True)
class ImageScore:
    image_id: str
    metric: str
    value: float
    provenance: Provenance


def _parse_row(row_no: int, row: Mapping[str, str]) -> ExternalScore:
    image_id = row["image_id"].strip()
    if not image_id:
        raise MalformedRow(row_no, "empty image_id")
    try:
        metric = ExternalMetric(row["metric"].strip())
    except ValueError:
        raise MalformedRow(row_no, f"unknown metric '{row['metric']}'") from None

    prop_text = row["property"].strip()
    try:
        prop = ClipProperty(prop_text) if prop_text else None
    except ValueError:
        raise MalformedRow(row_no, f"unknown property '{prop_text}'") from None
    if (metric is ExternalMetric.CLIPIQA) != (prop is not None):
        raise MalformedRow(row_no, "a property is required for CLIPIQA rows and only for them")

    try:
        value = float(row["value"])
    except ValueError:
        raise MalformedRow(row_no, f"value '{row['value']}' is not a number") from None
    if not np.isfinite(value):
        raise MalformedRow(row_no, "non-finite value")

    if metric in VALUE_RANGES:
        lo, hi = VALUE_RANGES[metric]
        if not lo <= value <= hi:
            raise RangeViolation(row_no, str(metric), value)
    return ExternalScore(image_id, metric, prop, value)


def load_external_scores(path: Path) -> list[ExternalScore]:
    """
    Reads a CSV with header image_id,metric,property,value.
    Row numbers in errors count the header as row 1.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        logger.warning(f"⚠️ External score file '{path}' is empty.")
        return []
    except OSError as e:
        raise IoFailure(f"cannot read external scores '{path}': {e}") from e

    missing = [c for c in EXTERNAL_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedRow(1, f"missing columns {missing}")
    if frame.empty:
        logger.warning(f"⚠️ External score file '{path}' has no rows.")
        return []

    return [_parse_row(i + 2, row) for i, row in enumerate(frame[EXTERNAL_COLUMNS].to_dict("records"))]


def attach_provenance(scores: Sequence[ExternalScore], provenance: Mapping[str, Provenance]) -> list[ImageScore]:
    """Joins external scores with the manifest's provenance tags; unknown ids are an error."""
    out = []
    for s in scores:
        if s.image_id not in provenance:
            raise DataError(f"external score for unknown image '{s.image_id}'")
        out.append(ImageScore(s.image_id, s.key, s.value, provenance[s.image_id]))
    return out


def write_score_csv(scores: Sequence[ImageScore], path: Path):
    frame = pd.DataFrame(
        [(s.image_id, s.metric, s.value, str(s.provenance)) for s in scores],
        columns=SCORE_COLUMNS,
    ).sort_values(["metric", "image_id"], kind="stable")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise IoFailure(f"cannot write scores '{path}': {e}") from e


def read_score_csv(path: Path) -> list[ImageScore]:
    try:
        dtype = {"image_id": str, "metric": str, "value": float, "provenance": str}
        frame = pd.read_csv(path, dtype=dtype, float_precision="round_trip")
    except (OSError, ValueError) as e:
        raise IoFailure(f"cannot read scores '{path}': {e}") from e
    return [ImageScore(r.image_id, r.metric, float(r.value), Provenance(r.provenance)) for r in frame.itertuples()]


@dataclass(frozen=True)
class GroupComparison:
    metric: str
    n_real: int
    n_synthetic: int
    real_mean: float
    real_sd: float
    synthetic_mean: float
    synthetic_sd: float
    u: float
    p_value: float
    significant: bool


def _mean_sd(values: np.ndarray) -> tuple[float, float]:
    sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), sd


def compare_groups(scores: Sequence[ImageScore], alpha: float = 0.05) -> list[GroupComparison]:
    """Mann-Whitney U between real and synthetic images for every metric, in metric order."""
    by_metric: dict[str, dict[Provenance, list[float]]] = {}
    for s in scores:
        by_metric.setdefault(s.metric, {Provenance.REAL: [], Provenance.SYNTHETIC: []})[s.provenance].append(s.value)

    results = []
    for metric in sorted(by_metric):
        real = np.array(by_metric[metric][Provenance.REAL])
        syn = np.array(by_metric[metric][Provenance.SYNTHETIC])
        if not len(real) or not len(syn):
            logger.warning(f"⚠️ Metric '{metric}' lacks one of the groups. Skipping comparison.")
            continue
        test = mann_whitney_u(real, syn)
        rm, rsd = _mean_sd(real)
        sm, ssd = _mean_sd(syn)
        results.append(
            GroupComparison(
                metric, len(real), len(syn), rm, rsd, sm, ssd, test.statistic, test.p_value, test.p_value < alpha
            )
        )
    return results


def comparison_frame(results: Sequence[GroupComparison]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in results], columns=[f.name for f in fields(GroupComparison)])


def score_images(
    images: Sequence[tuple[str, Path, Provenance]],
    brisque: BrisqueModel | None = None,
    niqe: NiqeModel | None = None,
) -> list[ImageScore]:
    """
    Native BRISQUE and NIQE scores for (image_id, path, provenance) triples.
    Images too small for a NIQE patch are left out of that metric with a warning.
    """
    out = []
    for image_id, path, provenance in images:
        img = load_gray(path)
        if brisque is not None:
            out.append(ImageScore(image_id, "BRISQUE", brisque_score(brisque_features(img), brisque), provenance))
        if niqe is not None:
            try:
                out.append(ImageScore(image_id, "NIQE", niqe_score(img, niqe), provenance))
            except InsufficientPatches as e:
                logger.warning(f"⚠️ No NIQE score for '{image_id}': {e}")
    logger.info(f"🖼️ Scored {len(images)} images.")
    return out
