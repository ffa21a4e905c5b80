"""
Detection evaluation value types.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from dataclasses import dataclass, field
from typing import NamedTuple

from ..annotations.types import BoundingBox
from ..errors import DataError, InvalidSpec

# 0.50, 0.55, ..., 0.95
COCO_IOU_GRID: tuple[float, ...] = tuple((50 + 5 * i) / 100 for i in range(10))


@dataclass(frozen=True, slots=True)
class Detection:
    image_id: str
    class_id: int
    confidence: float
    box: BoundingBox

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise DataError(f"confidence {self.confidence} outside [0, 1] on '{self.image_id}'")


@dataclass(frozen=True, slots=True)
class GroundTruth:
    image_id: str
    class_id: int
    box: BoundingBox


@dataclass(frozen=True)
class EvalConfig:
    iou_thresholds: tuple[float, ...] = COCO_IOU_GRID
    nms_iou: float = 0.7
    apply_nms: bool = False
    per_class: bool = True
    # Operating point for precision/recall/F1.
    confidence_threshold: float = 0.25

    def __post_init__(self):
        ts = self.iou_thresholds
        if not ts or any(not 0.0 < t <= 1.0 for t in ts):
            raise InvalidSpec(f"IoU thresholds must lie in (0, 1], got {ts}")
        if any(b <= a for a, b in zip(ts, ts[1:], strict=False)):
            raise InvalidSpec(f"IoU thresholds must be strictly increasing, got {ts}")
        if not 0.0 < self.nms_iou <= 1.0:
            raise InvalidSpec(f"nms_iou must lie in (0, 1], got {self.nms_iou}")


@dataclass(frozen=True, slots=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise DataError(f"negative confusion count {self}")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


class PRF(NamedTuple):
    """Precision, recall and F1; None marks an undefined value (zero denominator)."""

    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True, slots=True)
class Match:
    det_index: int
    truth_index: int | None
    iou: float


@dataclass(frozen=True)
class MatchResult:
    counts: ConfusionCounts
    matches: list[Match] = field(default_factory=list)


@dataclass(frozen=True)
class MapResult:
    map50: float
    map50_95: float
    # class_id -> {iou threshold -> AP}
    per_class: dict[int, dict[float, float]]


@dataclass(frozen=True, slots=True)
class MetricRow:
    metric: str
    class_name: str
    threshold: str
    value: float | None
