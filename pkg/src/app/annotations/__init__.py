"""Annotation parsing, conversion and standardization."""

from .labels import (
    bbox_from_polygon,
    box_to_polygon,
    emit_label_file,
    parse_label_file,
    read_labels,
    remap_classes,
    write_labels,
)
from .masks import extract_masked_crop, pad_to_square, rasterize_polygon, read_mask_png, write_mask_png
from .types import (
    SPECIES_TO_GROUP,
    TARGET_CLASSES,
    BitMask,
    BoundingBox,
    ClassMap,
    ImageRef,
    Instance,
    LabeledImage,
    PolygonAnnotation,
    Provenance,
)

__all__ = [
    "SPECIES_TO_GROUP",
    "TARGET_CLASSES",
    "BitMask",
    "BoundingBox",
    "ClassMap",
    "ImageRef",
    "Instance",
    "LabeledImage",
    "PolygonAnnotation",
    "Provenance",
    "bbox_from_polygon",
    "box_to_polygon",
    "emit_label_file",
    "extract_masked_crop",
    "pad_to_square",
    "parse_label_file",
    "rasterize_polygon",
    "read_labels",
    "read_mask_png",
    "remap_classes",
    "write_labels",
    "write_mask_png",
]
