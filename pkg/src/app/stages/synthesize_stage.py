"""
Synthesize Stage.
Builds the synthetic pool: text-guided generation followed by model-guided annotation,
or validation of a pool supplied ready-made. Every synthetic image carries a sidecar
with its generation metadata or an ingestion record.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import shutil
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from PIL import Image

from ..adapters.schemas import (
    AnnotationRequest,
    AnnotationResponse,
    GenerationRequest,
    GenerationResponse,
    ImageToAnnotate,
)
from ..annotations.types import Instance, LabeledImage, Provenance
from ..detection.io import read_detections_file
from ..errors import ConfigError, DataError, IoFailure, SchemaViolation
from ..manifest import ManifestEntry, dump_json, load_labeled_images, load_manifest, resolve
from ..services.adapter_service import AdapterService
from ..settings import AdapterRole, GenerationConfig
from .base_stage import Stage
from .ingest_stage import MANIFEST_FILE, persist_labeled

logger = logging.getLogger(__name__)

IMAGES_DIR = "images"
SYNTHETIC_PREFIX = "syn-"


def generation_requests(config: GenerationConfig) -> list[GenerationRequest]:
    """One request per prompt; image seeds run consecutively across prompts."""
    return [
        GenerationRequest(
            prompt=prompt,
            steps=config.steps,
            guidance=config.guidance,
            scheduler=config.scheduler,
            seed=config.seed + k * config.images_per_prompt,
            width=config.width,
            height=config.height,
            count=config.images_per_prompt,
        )
        for k, prompt in enumerate(config.prompts)
    ]


def _generate_one(k: int, request: GenerationRequest, service: AdapterService, directory: Path) -> list[ManifestEntry]:
    run_dir = directory / "generator" / f"request_{k:03d}"
    response = service.run(request, GenerationResponse, run_dir)
    if len(response.images) != request.count:
        raise SchemaViolation(f"generator returned {len(response.images)} images for count={request.count}")

    entries = []
    for i, generated in enumerate(response.images):
        image_id = f"{SYNTHETIC_PREFIX}{k:03d}-{i:04d}"
        target = directory / IMAGES_DIR / f"{image_id}.png"
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(run_dir / generated.file, target)
            with Image.open(target) as img:
                width, height = img.size
        except OSError as e:
            raise IoFailure(f"cannot store generated image '{image_id}': {e}") from e

        sidecar = f"{IMAGES_DIR}/{image_id}.json"
        dump_json(
            {
                "id": image_id,
                "generator": service.spec.label,
                "prompt": request.prompt,
                "seed": generated.seed,
                "steps": request.steps,
                "guidance": request.guidance,
                "scheduler": request.scheduler,
                "width": width,
                "height": height,
            },
            directory / sidecar,
        )
        entries.append(
            ManifestEntry(
                id=image_id,
                path=f"{IMAGES_DIR}/{image_id}.png",
                width=width,
                height=height,
                provenance=Provenance.SYNTHETIC,
                origin=sidecar,
            )
        )
    return entries


def generate_images(
    requests: Sequence[GenerationRequest], service: AdapterService, directory: Path, workers: int = 1
) -> list[ManifestEntry]:
    """
    Runs the generator once per request and stores each image with a metadata sidecar
    under `directory/images`. Ids are "syn-<request>-<index>".
    """
    with ThreadPoolExecutor(max_workers=workers) as pool:
        batches = list(pool.map(lambda kr: _generate_one(*kr, service, directory), enumerate(requests)))
    entries = [e for batch in batches for e in batch]
    logger.info(f"🎨 Generated {len(entries)} synthetic images from {len(requests)} prompt(s).")
    return entries


def annotate_images(
    entries: Sequence[ManifestEntry],
    image_base: Path,
    service: AdapterService,
    work_dir: Path,
    class_names: Sequence[str],
    threshold: float = 0.25,
) -> list[LabeledImage]:
    """
    Labels images with the annotator's detections at or above `threshold`.
    Results are flagged as model-annotated; images left without instances are warned about.
    """
    request = AnnotationRequest(
        images=[
            ImageToAnnotate(id=e.id, path=str(resolve(image_base, e.path).resolve()), width=e.width, height=e.height)
            for e in entries
        ],
        class_names=list(class_names),
    )
    response = service.run(request, AnnotationResponse, work_dir)
    try:
        dets = read_detections_file(work_dir / response.detections)
    except DataError as e:
        raise SchemaViolation(f"annotator detections are malformed: {e}") from e

    known = {e.id for e in entries}
    by_image: dict[str, list[Instance]] = {e.id: [] for e in entries}
    for d in dets:
        if d.image_id not in known:
            raise SchemaViolation(f"annotator labeled unknown image '{d.image_id}'")
        if not 0 <= d.class_id < len(class_names):
            raise SchemaViolation(f"annotator emitted class {d.class_id} outside {len(class_names)} classes")
        if d.confidence < threshold:
            continue
        box = d.box.clamped()
        if box.w <= 0 or box.h <= 0:
            logger.warning(f"⚠️ Dropping a degenerate annotation on '{d.image_id}'.")
            continue
        by_image[d.image_id].append(Instance(d.class_id, box))

    labeled = []
    for e in entries:
        instances = tuple(by_image[e.id])
        if not instances:
            logger.warning(f"⚠️ No detections at confidence >= {threshold} on '{e.id}'.")
        labeled.append(LabeledImage(e.image_ref(), instances, model_annotated=True))
    logger.info(f"🏷️ Annotated {len(labeled)} images with {sum(len(li.instances) for li in labeled)} instances.")
    return labeled


class SynthesizeStage(Stage):
    name = "synthesize"

    def run(self):
        ctx = self._context
        config = ctx.config

        if not config.p_values:
            logger.info("⏭️ No synthetic proportions configured. Synthetic pool not needed.")
            ctx.synthetic = None
            return

        if config.synthetic_manifest is not None:
            entries, labeled, base = self._supplied_pool(config.synthetic_manifest)
        elif config.offline:
            raise ConfigError("offline mode needs a 'synthetic_manifest'; adapters are never invoked offline")
        else:
            entries, labeled, base = self._generated_pool()

        ctx.synthetic = persist_labeled(entries, {li.image.id: li for li in labeled}, base, self.directory)
        logger.info(f"🧬 Synthetic pool holds {len(entries)} images.")

    def _supplied_pool(self, path: Path):
        manifest = load_manifest(path)
        for e in manifest.images:
            if e.provenance is not Provenance.SYNTHETIC:
                raise DataError(f"synthetic pool lists non-synthetic image '{e.id}'")
            origin = resolve(path.parent, e.origin)
            if origin is None or not origin.is_file():
                raise DataError(f"synthetic image '{e.id}' has no generation sidecar or ingestion record")
        labeled = load_labeled_images(manifest, path.parent, len(self._context.config.class_names))
        return manifest.images, labeled, path.parent

    def _generated_pool(self):
        config = self._context.config
        generator = config.adapter(AdapterRole.GENERATOR)
        annotator = config.adapter(AdapterRole.ANNOTATOR)
        if generator is None or annotator is None:
            raise ConfigError("synthetic generation needs both a generator and an annotator adapter")

        entries = generate_images(
            generation_requests(config.generation), AdapterService(generator), self.directory, config.workers
        )
        labeled = annotate_images(
            entries,
            self.directory,
            AdapterService(annotator),
            self.directory / "annotator",
            config.class_names,
            config.evaluation.annotation_threshold,
        )
        entries = [e.model_copy(update={"annotated_by": "model"}) for e in entries]
        return entries, labeled, self.directory

    def load(self):
        ctx = self._context
        path = self.directory / MANIFEST_FILE
        ctx.synthetic = load_manifest(path) if path.exists() else None
