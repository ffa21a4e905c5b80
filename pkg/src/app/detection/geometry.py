"""
Box overlap and non-maximum suppression.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from collections.abc import Sequence

import numpy as np

from ..annotations.types import BoundingBox
from .types import Detection

EPS = 1e-12


def boxes_to_xyxy(boxes: Sequence[BoundingBox]) -> np.ndarray:
    if not boxes:
        return np.zeros((0, 4))
    return np.array([b.xyxy() for b in boxes], dtype=np.float64)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between (N, 4) and (M, 4) xyxy arrays."""
    tl = np.maximum(a[:, None, :2], b[None, :, :2])
    br = np.minimum(a[:, None, 2:], b[None, :, 2:])
    inter = np.clip(br - tl, 0.0, None).prod(axis=2)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(union > EPS, inter / np.maximum(union, EPS), 0.0)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    return float(iou_matrix(boxes_to_xyxy([a]), boxes_to_xyxy([b]))[0, 0])


def confidence_order(dets: Sequence[Detection]) -> list[int]:
    """Indices by confidence desc, then box area desc, then input position."""
    return sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, -dets[i].box.area, i))


def nms(dets: Sequence[Detection], iou_threshold: float) -> list[Detection]:
    """
    Greedy per-class suppression for the detections of one image.
    A detection is dropped when it overlaps an already kept detection of its class
    with IoU above `iou_threshold`.

    :return: Survivors in confidence order.
    """
    order = confidence_order(dets)
    xyxy = boxes_to_xyxy([d.box for d in dets])
    kept: list[int] = []
    for i in order:
        same = [k for k in kept if dets[k].class_id == dets[i].class_id]
        if same and iou_matrix(xyxy[i : i + 1], xyxy[same]).max() > iou_threshold:
            continue
        kept.append(i)
    return [dets[i] for i in kept]


def nms_per_image(dets: Sequence[Detection], iou_threshold: float) -> list[Detection]:
    by_image: dict[str, list[Detection]] = {}
    for d in dets:
        by_image.setdefault(d.image_id, []).append(d)
    out: list[Detection] = []
    for image_id in sorted(by_image):
        out.extend(nms(by_image[image_id], iou_threshold))
    return out
