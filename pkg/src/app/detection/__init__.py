"""Detection scoring against ground truth."""

from .geometry import iou, iou_matrix, nms, nms_per_image
from .io import (
    format_detections,
    parse_detections,
    read_detections_file,
    read_metric_csv,
    truths_from_labels,
    write_detections_file,
    write_metric_csv,
)
from .metrics import average_precision, evaluate_detections, map_scores, match_detections, pr_curve, prf
from .types import (
    COCO_IOU_GRID,
    PRF,
    ConfusionCounts,
    Detection,
    EvalConfig,
    GroundTruth,
    MapResult,
    Match,
    MatchResult,
    MetricRow,
)

__all__ = [
    "COCO_IOU_GRID",
    "PRF",
    "ConfusionCounts",
    "Detection",
    "EvalConfig",
    "GroundTruth",
    "MapResult",
    "Match",
    "MatchResult",
    "MetricRow",
    "average_precision",
    "evaluate_detections",
    "format_detections",
    "iou",
    "iou_matrix",
    "map_scores",
    "match_detections",
    "nms",
    "nms_per_image",
    "parse_detections",
    "pr_curve",
    "prf",
    "read_detections_file",
    "read_metric_csv",
    "truths_from_labels",
    "write_detections_file",
    "write_metric_csv",
]
