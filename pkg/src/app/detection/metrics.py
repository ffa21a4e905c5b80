"""
Detection metrics: greedy matching, precision/recall/F1, PR curves, AP and mAP.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence

import numpy as np

from ..errors import NoGroundTruth
from .geometry import boxes_to_xyxy, confidence_order, iou_matrix, nms_per_image
from .types import PRF, ConfusionCounts, Detection, EvalConfig, GroundTruth, MapResult, Match, MatchResult, MetricRow

logger = logging.getLogger(__name__)

MAP50_IOU = 0.5
RECALL_GRID = np.arange(101) / 100


def match_detections(
    dets: Sequence[Detection],
    truths: Sequence[GroundTruth],
    iou_threshold: float,
    class_id: int | None = None,
) -> MatchResult:
    """
    Greedy matching: detections are visited in confidence order and each takes the
    unmatched same-image, same-class truth with the highest IoU >= `iou_threshold`.
    Every truth is matched at most once.

    :param class_id: Restrict both inputs to this class; None evaluates all classes.
    :return: Counts plus one Match per detection, in visiting order. Match indices refer to the (filtered) inputs.
    """
    if class_id is not None:
        dets = [d for d in dets if d.class_id == class_id]
        truths = [t for t in truths if t.class_id == class_id]

    groups: dict[tuple[str, int], list[int]] = {}
    for j, t in enumerate(truths):
        groups.setdefault((t.image_id, t.class_id), []).append(j)
    det_xyxy = boxes_to_xyxy([d.box for d in dets])
    gt_xyxy = boxes_to_xyxy([t.box for t in truths])

    taken = np.zeros(len(truths), dtype=bool)
    matches = []
    for i in confidence_order(dets):
        candidates = np.array(groups.get((dets[i].image_id, dets[i].class_id), []), dtype=int)
        best_j, best_iou = None, 0.0
        if candidates.size:
            free = candidates[~taken[candidates]]
            if free.size:
                overlaps = iou_matrix(det_xyxy[i : i + 1], gt_xyxy[free])[0]
                k = int(np.argmax(overlaps))
                if overlaps[k] >= iou_threshold:
                    best_j, best_iou = int(free[k]), float(overlaps[k])
                    taken[best_j] = True
        matches.append(Match(i, best_j, best_iou))

    tp = int(taken.sum())
    return MatchResult(ConfusionCounts(tp, len(dets) - tp, len(truths) - tp), matches)


def _ratio(num: float, den: float) -> float | None:
    return num / den if den > 0 else None


def prf(counts: ConfusionCounts) -> PRF:
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    if precision is None or recall is None:
        return PRF(precision, recall, None)
    return PRF(precision, recall, _ratio(2 * precision * recall, precision + recall))


def pr_curve(
    dets: Sequence[Detection], truths: Sequence[GroundTruth], class_id: int, iou_threshold: float
) -> list[tuple[float, float]]:
    """
    (recall, precision) after each distinct confidence cutoff, highest cutoff first.
    Empty when there are no detections or no ground truth of the class.
    """
    dets = [d for d in dets if d.class_id == class_id]
    n_gt = sum(t.class_id == class_id for t in truths)
    if n_gt == 0 or not dets:
        return []

    result = match_detections(dets, truths, iou_threshold, class_id)
    hits = np.array([m.truth_index is not None for m in result.matches], dtype=np.float64)
    conf = np.array([dets[m.det_index].confidence for m in result.matches])

    tp = np.cumsum(hits)
    fp = np.cumsum(1.0 - hits)
    # Only the last detection of each equal-confidence run is a valid cutoff.
    last_of_run = np.append(conf[1:] != conf[:-1], True)
    recall = tp[last_of_run] / n_gt
    precision = tp[last_of_run] / (tp[last_of_run] + fp[last_of_run])
    return list(zip(recall.tolist(), precision.tolist(), strict=True))


def average_precision(curve: Sequence[tuple[float, float]]) -> float:
    """101-point interpolated AP: mean over r in {0, 0.01, ..., 1} of the best precision at recall >= r."""
    if not curve:
        return 0.0
    pts = np.array(curve, dtype=np.float64)
    order = np.argsort(pts[:, 0], kind="stable")
    recall, precision = pts[order, 0], pts[order, 1]
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_GRID, side="left")
    values = np.where(idx < len(recall), envelope[np.minimum(idx, len(recall) - 1)], 0.0)
    return float(values.mean())


def map_scores(dets: Sequence[Detection], truths: Sequence[GroundTruth], config: EvalConfig) -> MapResult:
    """
    Unweighted mean of per-class AP over the classes that have ground truth.
    mAP50-95 averages mAP over `config.iou_thresholds`.
    """
    classes = sorted({t.class_id for t in truths})
    if not classes:
        raise NoGroundTruth("no ground-truth instances to evaluate against")
    if config.apply_nms:
        dets = nms_per_image(dets, config.nms_iou)

    thresholds = sorted({MAP50_IOU, *config.iou_thresholds})
    per_class: dict[int, dict[float, float]] = {}
    for c in classes:
        cls_dets = [d for d in dets if d.class_id == c]
        cls_truths = [t for t in truths if t.class_id == c]
        per_class[c] = {t: average_precision(pr_curve(cls_dets, cls_truths, c, t)) for t in thresholds}

    map50 = float(np.mean([per_class[c][MAP50_IOU] for c in classes]))
    map50_95 = float(np.mean([np.mean([per_class[c][t] for c in classes]) for t in config.iou_thresholds]))
    return MapResult(map50, map50_95, per_class)


def _grid_label(thresholds: Sequence[float]) -> str:
    return f"{thresholds[0]:.2f}:{thresholds[-1]:.2f}"


def evaluate_detections(
    dets: Sequence[Detection],
    truths: Sequence[GroundTruth],
    config: EvalConfig,
    class_names: Sequence[str] | None = None,
) -> list[MetricRow]:
    """
    Full metric table for one model on one test set: mAP50, mAP50-95 and, at the
    configured confidence operating point, precision/recall/F1 at IoU 0.50.
    Per-class rows follow the aggregate rows when `config.per_class` is set.
    """

    def name(c: int) -> str:
        return class_names[c] if class_names is not None and c < len(class_names) else str(c)

    scores = map_scores(dets, truths, config)
    grid = _grid_label(config.iou_thresholds)
    rows = [
        MetricRow("mAP50", "all", f"{MAP50_IOU:.2f}", scores.map50),
        MetricRow("mAP50_95", "all", grid, scores.map50_95),
    ]

    if config.apply_nms:
        dets = nms_per_image(dets, config.nms_iou)
    operating = [d for d in dets if d.confidence >= config.confidence_threshold]
    overall = prf(match_detections(operating, truths, MAP50_IOU).counts)
    rows += [
        MetricRow("precision", "all", f"{MAP50_IOU:.2f}", overall.precision),
        MetricRow("recall", "all", f"{MAP50_IOU:.2f}", overall.recall),
        MetricRow("F1", "all", f"{MAP50_IOU:.2f}", overall.f1),
    ]

    if config.per_class:
        for c, aps in scores.per_class.items():
            p = prf(match_detections(operating, truths, MAP50_IOU, class_id=c).counts)
            rows += [
                MetricRow("AP50", name(c), f"{MAP50_IOU:.2f}", aps[MAP50_IOU]),
                MetricRow("AP50_95", name(c), grid, float(np.mean([aps[t] for t in config.iou_thresholds]))),
                MetricRow("precision", name(c), f"{MAP50_IOU:.2f}", p.precision),
                MetricRow("recall", name(c), f"{MAP50_IOU:.2f}", p.recall),
                MetricRow("F1", name(c), f"{MAP50_IOU:.2f}", p.f1),
            ]

    logger.debug(f"mAP50={scores.map50:.4f} mAP50-95={scores.map50_95:.4f} over {len(truths)} truths")
    return rows
