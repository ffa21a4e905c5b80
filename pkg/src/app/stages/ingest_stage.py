"""
Ingest Stage.
Reads the real dataset, standardizes its labels onto the target classes and, when a
segmenter is configured, turns every box into an instance polygon.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..adapters.schemas import BoxPrompt, SegmentationRequest, SegmentationResponse
from ..annotations.labels import bbox_from_polygon, remap_classes, write_labels
from ..annotations.types import ClassMap, Instance, LabeledImage, PolygonAnnotation, Provenance
from ..errors import AdapterError, DataError
from ..manifest import (
    Manifest,
    ManifestEntry,
    load_labeled_images,
    load_manifest,
    rebase_entry,
    resolve,
    save_manifest,
)
from ..services.adapter_service import AdapterService
from ..settings import AdapterRole
from .base_stage import Stage

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
LABELS_DIR = "labels"


def _clip(v: float) -> float:
    return min(1.0, max(0.0, v))


def _segment_one(
    labeled: LabeledImage, image_base: Path, service: AdapterService, work_dir: Path
) -> tuple[LabeledImage, int]:
    if not labeled.instances:
        return labeled, 0

    image = labeled.image
    request = SegmentationRequest(
        image_path=str(resolve(image_base, image.path).resolve()),
        width=image.width,
        height=image.height,
        boxes=[
            BoxPrompt(class_id=i.class_id, cx=i.box.cx, cy=i.box.cy, w=i.box.w, h=i.box.h) for i in labeled.instances
        ],
    )
    try:
        response = service.run(request, SegmentationResponse, work_dir / image.id)
    except AdapterError as e:
        logger.warning(f"⚠️ Segmentation failed for '{image.id}' ({e}). Keeping {len(labeled.instances)} box(es).")
        return labeled, len(labeled.instances)

    polygons = {m.box_index: m.polygon for m in response.masks}
    instances, failures = [], 0
    for index, inst in enumerate(labeled.instances):
        vertices = polygons.get(index)
        try:
            if vertices is None:
                raise DataError("no mask returned")
            polygon = PolygonAnnotation(inst.class_id, tuple((_clip(x), _clip(y)) for x, y in vertices))
            instances.append(Instance(inst.class_id, bbox_from_polygon(polygon), polygon))
        except DataError as e:
            logger.warning(f"⚠️ Box {index} of '{image.id}' keeps its rectangle: {e}")
            instances.append(inst)
            failures += 1
    return LabeledImage(image, tuple(instances), labeled.model_annotated), failures


def segment_dataset(
    labeled: Sequence[LabeledImage],
    image_base: Path,
    service: AdapterService,
    work_dir: Path,
    workers: int = 1,
) -> tuple[list[LabeledImage], int]:
    """
    Prompts the segmenter with every image's boxes in one batch and attaches the returned
    polygons. Failed images or boxes keep their rectangles and are counted, not raised.

    :return: Segmented images in input order, and the number of boxes left unsegmented.
    """
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda li: _segment_one(li, image_base, service, work_dir), labeled))
    failures = sum(f for _, f in results)
    if failures:
        logger.warning(f"⚠️ {failures} box(es) kept without a mask.")
    logger.info(f"✂️ Segmented {len(results)} images.")
    return [li for li, _ in results], failures


def persist_labeled(
    entries: Sequence[ManifestEntry], labeled: dict[str, LabeledImage], source_base: Path, directory: Path
) -> Manifest:
    """Writes canonical label files under `directory/labels` and a manifest pointing at them."""
    images = []
    for entry in entries:
        labels_path = directory / LABELS_DIR / f"{entry.id}.txt"
        write_labels(labeled[entry.id], labels_path)
        rebased = rebase_entry(entry, source_base, directory)
        images.append(rebased.model_copy(update={"labels_path": f"{LABELS_DIR}/{entry.id}.txt"}))
    manifest = Manifest(images=images)
    save_manifest(manifest, directory / MANIFEST_FILE)
    return manifest


class IngestStage(Stage):
    name = "ingest"

    def run(self):
        ctx = self._context
        config = ctx.config
        source = config.dataset_root / config.manifest
        manifest = load_manifest(source)

        synthetic = [e.id for e in manifest.images if e.provenance is not Provenance.REAL]
        if synthetic:
            raise DataError(f"real dataset manifest lists non-real images {synthetic[:5]}")

        class_count = len(config.source_classes or config.class_names)
        labeled = load_labeled_images(manifest, source.parent, class_count)
        if config.source_classes:
            kwargs = {"entries": config.class_map} if config.class_map else {}
            class_map = ClassMap(tuple(config.source_classes), target_classes=tuple(config.class_names), **kwargs)
            class_map.check_total()
            labeled = [remap_classes(li, class_map) for li in labeled]

        segmenter = config.adapter(AdapterRole.SEGMENTER)
        if segmenter is not None and not config.offline:
            labeled, failures = segment_dataset(
                labeled, source.parent, AdapterService(segmenter), self.directory / "segmenter", config.workers
            )
            ctx.warnings["segmentation_failures"] += failures

        by_id = {li.image.id: li for li in labeled}
        ctx.real = persist_labeled(manifest.images, by_id, source.parent, self.directory)
        ctx.labeled = by_id
        n_instances = sum(len(li.instances) for li in labeled)
        logger.info(f"📥 Ingested {len(labeled)} real images with {n_instances} instances.")

    def load(self):
        ctx = self._context
        manifest = load_manifest(self.directory / MANIFEST_FILE)
        labeled = load_labeled_images(manifest, self.directory, len(ctx.config.class_names))
        ctx.real = manifest
        ctx.labeled = {li.image.id: li for li in labeled}
