"""
Detection label text format.
One instance per line, whitespace separated, normalized coordinates:
  box:     class cx cy w h
  polygon: class x1 y1 x2 y2 x3 y3 [...]

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from pathlib import Path

from ..errors import CoordinateOutOfRange, IoFailure, MalformedLine, UnknownClass, UnmappedClass
from .types import BoundingBox, ClassMap, ImageRef, Instance, LabeledImage, PolygonAnnotation, require_extent

logger = logging.getLogger(__name__)

BOX_FIELDS = 5
MIN_POLYGON_FIELDS = 7
COORD_FORMAT = "{:.6f}"

LabelRecord = tuple[int, BoundingBox | PolygonAnnotation]


def _parse_class(token: str, line_no: int, class_count: int) -> int:
    try:
        class_id = int(token)
    except ValueError:
        raise MalformedLine(line_no, f"class id '{token}' is not an integer") from None
    if class_id < 0 or class_id >= class_count:
        raise UnknownClass(line_no, class_id, class_count)
    return class_id


def _parse_coords(tokens: list[str], line_no: int) -> list[float]:
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise MalformedLine(line_no, "non-numeric coordinate") from None
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise CoordinateOutOfRange(line_no, v)
    return values


def parse_label_file(text: str, class_count: int) -> list[LabelRecord]:
    """
    Parses a label file into (class_id, box-or-polygon) records.

    :param text: Full file contents.
    :param class_count: Number of classes of the active class list.
    :return: Records in file order; blank lines are skipped.
    """
    records: list[LabelRecord] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue

        n = len(tokens)
        if n != BOX_FIELDS and (n < MIN_POLYGON_FIELDS or n % 2 == 0):
            raise MalformedLine(line_no, f"{n} fields")

        class_id = _parse_class(tokens[0], line_no, class_count)
        coords = _parse_coords(tokens[1:], line_no)

        if n == BOX_FIELDS:
            cx, cy, w, h = coords
            if w == 0.0 or h == 0.0:
                raise CoordinateOutOfRange(line_no, 0.0)
            records.append((class_id, BoundingBox(cx, cy, w, h)))
        else:
            vertices = tuple(zip(coords[0::2], coords[1::2], strict=True))
            records.append((class_id, PolygonAnnotation(class_id, vertices)))

    return records


def _format(values) -> str:
    return " ".join(COORD_FORMAT.format(v) for v in values)


def emit_label_file(records: list[LabelRecord]) -> str:
    """Canonical text form of `records` (6 decimals, trailing newline)."""
    lines = []
    for class_id, geometry in records:
        if isinstance(geometry, BoundingBox):
            body = _format((geometry.cx, geometry.cy, geometry.w, geometry.h))
        else:
            body = _format(c for vertex in geometry.vertices for c in vertex)
        lines.append(f"{class_id} {body}")
    return "".join(line + "\n" for line in lines)


def bbox_from_polygon(polygon: PolygonAnnotation) -> BoundingBox:
    """Axis-aligned bounding rectangle of the polygon's vertices."""
    pts = polygon.as_array()
    x1, y1 = pts.min(axis=0)
    x2, y2 = pts.max(axis=0)
    return require_extent(BoundingBox.from_xyxy(float(x1), float(y1), float(x2), float(y2)))


def box_to_polygon(class_id: int, box: BoundingBox) -> PolygonAnnotation:
    """Rectangle polygon filling the box, clockwise from the top-left corner."""
    x1, y1, x2, y2 = box.xyxy()
    return PolygonAnnotation(class_id, ((x1, y1), (x2, y1), (x2, y2), (x1, y2)))


def records_to_instances(records: list[LabelRecord]) -> tuple[Instance, ...]:
    instances = []
    for class_id, geometry in records:
        if isinstance(geometry, BoundingBox):
            instances.append(Instance(class_id, geometry))
        else:
            instances.append(Instance(class_id, bbox_from_polygon(geometry), geometry))
    return tuple(instances)


def instances_to_records(instances: tuple[Instance, ...], prefer_polygons: bool = True) -> list[LabelRecord]:
    records: list[LabelRecord] = []
    for inst in instances:
        if prefer_polygons and inst.polygon is not None:
            records.append((inst.class_id, inst.polygon))
        else:
            records.append((inst.class_id, inst.box))
    return records


def read_labels(image: ImageRef, labels_path: Path | None, class_count: int, model_annotated: bool = False):
    """
    Loads a label file for `image`. A missing path means an image without instances.

    :return: LabeledImage with boxes (and polygons where the file has them).
    """
    if labels_path is None or not labels_path.exists():
        if labels_path is not None:
            logger.warning(f"⚠️ Label file '{labels_path}' missing for '{image.id}'. Treating as empty.")
        return LabeledImage(image, (), model_annotated)
    try:
        text = labels_path.read_text()
    except OSError as e:
        raise IoFailure(f"cannot read '{labels_path}': {e}") from e
    return LabeledImage(image, records_to_instances(parse_label_file(text, class_count)), model_annotated)


def write_labels(labeled: LabeledImage, labels_path: Path, prefer_polygons: bool = True):
    try:
        labels_path.parent.mkdir(parents=True, exist_ok=True)
        labels_path.write_text(emit_label_file(instances_to_records(labeled.instances, prefer_polygons)))
    except OSError as e:
        raise IoFailure(f"cannot write '{labels_path}': {e}") from e


def remap_classes(labeled: LabeledImage, class_map: ClassMap) -> LabeledImage:
    """
    Rewrites every instance's class id from the source vocabulary to the target groups.
    Geometry and instance order are untouched.
    """
    remapped = []
    for inst in labeled.instances:
        if inst.class_id >= len(class_map.source_classes):
            raise UnmappedClass(str(inst.class_id))
        target = class_map.target_id(inst.class_id)
        polygon = PolygonAnnotation(target, inst.polygon.vertices) if inst.polygon is not None else None
        remapped.append(Instance(target, inst.box, polygon))
    return LabeledImage(labeled.image, tuple(remapped), labeled.model_annotated)
