"""
Detection files ("image_id class_id confidence cx cy w h" per line) and metric CSVs.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from ..annotations.types import BoundingBox, LabeledImage
from ..errors import DataError, IoFailure, MalformedLine
from .types import Detection, GroundTruth, MetricRow

logger = logging.getLogger(__name__)

DETECTION_FIELDS = 7
METRIC_COLUMNS = ["metric", "class", "threshold", "value"]


def parse_detections(text: str) -> list[Detection]:
    dets = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        if len(tokens) != DETECTION_FIELDS:
            raise MalformedLine(line_no, f"{len(tokens)} fields, expected {DETECTION_FIELDS}")
        try:
            class_id = int(tokens[1])
            conf, cx, cy, w, h = (float(t) for t in tokens[2:])
        except ValueError:
            raise MalformedLine(line_no, "non-numeric field") from None
        try:
            dets.append(Detection(tokens[0], class_id, conf, BoundingBox(cx, cy, w, h)))
        except DataError as e:
            raise MalformedLine(line_no, str(e)) from None
    return dets


def format_detections(dets: Sequence[Detection]) -> str:
    lines = [
        f"{d.image_id} {d.class_id} {d.confidence:.6f} {d.box.cx:.6f} {d.box.cy:.6f} {d.box.w:.6f} {d.box.h:.6f}\n"
        for d in dets
    ]
    return "".join(lines)


def read_detections_file(path: Path) -> list[Detection]:
    try:
        text = path.read_text()
    except OSError as e:
        raise IoFailure(f"cannot read detections '{path}': {e}") from e
    return parse_detections(text)


def write_detections_file(dets: Sequence[Detection], path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_detections(dets))
    except OSError as e:
        raise IoFailure(f"cannot write detections '{path}': {e}") from e


def truths_from_labels(labeled: Sequence[LabeledImage]) -> list[GroundTruth]:
    return [GroundTruth(li.image.id, inst.class_id, inst.box) for li in labeled for inst in li.instances]


def metrics_frame(rows: Sequence[MetricRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.metric, r.class_name, r.threshold, r.value) for r in rows],
        columns=METRIC_COLUMNS,
    )


def write_metric_csv(rows: Sequence[MetricRow], path: Path):
    """Undefined values are written as empty cells."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        metrics_frame(rows).to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise IoFailure(f"cannot write metrics '{path}': {e}") from e


def read_metric_csv(path: Path) -> pd.DataFrame:
    try:
        dtype = {"metric": str, "class": str, "threshold": str, "value": float}
        return pd.read_csv(path, dtype=dtype, float_precision="round_trip")
    except (OSError, ValueError) as e:
        raise IoFailure(f"cannot read metrics '{path}': {e}") from e
