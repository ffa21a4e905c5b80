"""
Annotation value types: image references, boxes, polygons, masks and class maps.
All coordinates are normalized to the unit square unless stated otherwise.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from ..errors import DataError, DegenerateExtent, UnmappedClass

TARGET_CLASSES: tuple[str, ...] = ("sugar_beet", "monocot", "dicot")

# Species names as they appear in the field dataset, mapped to the botanical groups.
SPECIES_TO_GROUP: dict[str, str] = {
    "Sugar beet": "sugar_beet",
    "Cirsium": "dicot",
    "Convolvulus": "dicot",
    "Fallopia": "dicot",
    "Echinochloa": "monocot",
}


class Provenance(StrEnum):
    REAL = "real"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True, slots=True)
class ImageRef:
    id: str
    path: str
    width: int
    height: int
    provenance: Provenance = Provenance.REAL

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"image '{self.id}' has non-positive size {self.width}x{self.height}")


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """Center-format box (cx, cy, w, h) in normalized coordinates."""

    cx: float
    cy: float
    w: float
    h: float

    @classmethod
    def from_xyxy(cls, x1: float, y1: float, x2: float, y2: float) -> "BoundingBox":
        return cls((x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1)

    def xyxy(self) -> tuple[float, float, float, float]:
        return (self.cx - self.w / 2, self.cy - self.h / 2, self.cx + self.w / 2, self.cy + self.h / 2)

    @property
    def area(self) -> float:
        return self.w * self.h

    def clamped(self) -> "BoundingBox":
        """Clips the box to the unit square."""
        x1, y1, x2, y2 = self.xyxy()
        return BoundingBox.from_xyxy(max(0.0, x1), max(0.0, y1), min(1.0, x2), min(1.0, y2))


@dataclass(frozen=True, slots=True)
class PolygonAnnotation:
    class_id: int
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise DataError(f"polygon needs at least 3 vertices, got {len(self.vertices)}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=np.float64)


@dataclass(frozen=True, slots=True)
class BitMask:
    """Binary occupancy grid stored row-major as a (height, width) bool array."""

    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        if self.bits.shape != (self.height, self.width):
            raise DataError(f"mask bits shape {self.bits.shape} != ({self.height}, {self.width})")

    @property
    def fill_fraction(self) -> float:
        return float(self.bits.mean()) if self.bits.size else 0.0


@dataclass(frozen=True, slots=True)
class Instance:
    class_id: int
    box: BoundingBox
    polygon: PolygonAnnotation | None = None


@dataclass(frozen=True, slots=True)
class LabeledImage:
    image: ImageRef
    instances: tuple[Instance, ...] = ()
    model_annotated: bool = False


@dataclass(frozen=True)
class ClassMap:
    """
    Maps the source label vocabulary onto the fixed target set.
    `source_classes` gives the meaning of the class ids found in label files.
    """

    source_classes: tuple[str, ...]
    entries: dict[str, str] = field(default_factory=lambda: dict(SPECIES_TO_GROUP))
    target_classes: tuple[str, ...] = TARGET_CLASSES

    def __post_init__(self):
        unknown = sorted(set(self.entries.values()) - set(self.target_classes))
        if unknown:
            raise DataError(f"class map targets {unknown} are not in {list(self.target_classes)}")

    def target_id(self, source_id: int) -> int:
        name = self.source_classes[source_id]
        if name not in self.entries:
            raise UnmappedClass(name)
        return self.target_classes.index(self.entries[name])

    def check_total(self):
        """Raises UnmappedClass for the first source class without a mapping."""
        for name in self.source_classes:
            if name not in self.entries:
                raise UnmappedClass(name)


def require_extent(box: BoundingBox) -> BoundingBox:
    if box.w <= 0 or box.h <= 0:
        raise DegenerateExtent(f"box has zero extent (w={box.w}, h={box.h})")
    return box
