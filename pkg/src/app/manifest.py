"""
Dataset manifest: the JSON document listing images, their label files and provenance.
Paths inside a manifest are relative to the manifest's own directory.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError

from .annotations.labels import read_labels
from .annotations.types import ImageRef, LabeledImage, Provenance
from .errors import DataError, DuplicateId, EmptyManifest, IoFailure

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1


class ManifestEntry(BaseModel):
    id: str
    path: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    provenance: Provenance = Provenance.REAL
    labels_path: str | None = None
    annotated_by: Literal["human", "model"] = "human"
    # Generation sidecar or ingestion record; required for synthetic images.
    origin: str | None = None

    def image_ref(self) -> ImageRef:
        return ImageRef(self.id, self.path, self.width, self.height, self.provenance)


class Manifest(BaseModel):
    version: int = MANIFEST_VERSION
    images: list[ManifestEntry] = Field(default_factory=list)
    meta: dict[str, Any] = Field(default_factory=dict)

    def by_id(self) -> dict[str, ManifestEntry]:
        return {e.id: e for e in self.images}

    def check_unique(self):
        seen: set[str] = set()
        for entry in self.images:
            if entry.id in seen:
                raise DuplicateId(entry.id)
            seen.add(entry.id)


def dump_json(payload: Any, path: Path):
    """Writes JSON with sorted keys and a trailing newline so reruns are byte-identical."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write '{path}': {e}") from e


def save_manifest(manifest: Manifest, path: Path):
    dump_json(manifest.model_dump(mode="json"), path)


def load_manifest(path: Path) -> Manifest:
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise IoFailure(f"cannot read manifest '{path}': {e}") from e
    try:
        manifest = Manifest.model_validate(raw)
    except ValidationError as e:
        raise IoFailure(f"manifest '{path}' does not match the schema: {e}") from e
    if not manifest.images:
        raise EmptyManifest(f"manifest '{path}' lists no images")
    manifest.check_unique()
    return manifest


def resolve(base: Path, relative: str | None) -> Path | None:
    if relative is None:
        return None
    p = Path(relative)
    return p if p.is_absolute() else base / p


def load_labeled_image(entry: ManifestEntry, base: Path, class_count: int) -> LabeledImage:
    labels_path = resolve(base, entry.labels_path)
    return read_labels(entry.image_ref(), labels_path, class_count, model_annotated=entry.annotated_by == "model")


def load_labeled_images(manifest: Manifest, base: Path, class_count: int) -> list[LabeledImage]:
    """Reads every entry's label file; entries keep manifest order."""
    labeled = [load_labeled_image(entry, base, class_count) for entry in manifest.images]
    logger.debug(f"Loaded labels for {len(labeled)} images from {base}")
    return labeled


def relative_path(target: Path, start: Path) -> str:
    return Path(os.path.relpath(target, start)).as_posix()


def rebase_entry(entry: ManifestEntry, source_base: Path, target_dir: Path) -> ManifestEntry:
    """Re-expresses the entry's file paths relative to `target_dir`."""
    update = {"path": relative_path(resolve(source_base, entry.path), target_dir)}
    for field in ("labels_path", "origin"):
        value = resolve(source_base, getattr(entry, field))
        update[field] = relative_path(value, target_dir) if value is not None else None
    return entry.model_copy(update=update)


def write_subset_manifest(
    entries: dict[str, ManifestEntry],
    ids: list[str] | tuple[str, ...],
    source_base: Path,
    path: Path,
    meta: dict[str, Any] | None = None,
):
    """Writes the entries named by `ids`, in that order, rebased onto the new manifest's directory."""
    missing = [i for i in ids if i not in entries]
    if missing:
        raise DataError(f"manifest '{path}' would reference unknown images {missing[:5]}")
    images = [rebase_entry(entries[i], source_base, path.parent) for i in ids]
    save_manifest(Manifest(images=images, meta=meta or {}), path)
