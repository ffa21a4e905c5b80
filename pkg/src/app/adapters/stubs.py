"""
Deterministic stand-ins for the GPU-bound adapters, for desk-scale runs and tests.

    python -m app.adapters.stubs <role> <request.json> <output_dir>

- segmenter: one rectangle polygon exactly filling each prompted box.
- generator: seeded smooth-noise RGB images; equal seeds give byte-identical PNGs.
- annotator: a fixed detection table for every image.
- detector: the test set's ground truth, jittered and scored from the request seed.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from pydantic import ValidationError
from scipy import ndimage

from ..annotations.types import BoundingBox
from ..detection.io import truths_from_labels, write_detections_file
from ..detection.types import Detection
from ..errors import HarnessError
from ..manifest import load_labeled_images, load_manifest
from .schemas import (
    RESPONSE_FILE,
    AnnotationRequest,
    AnnotationResponse,
    DetectionRequest,
    DetectionResponse,
    GeneratedImage,
    GenerationRequest,
    GenerationResponse,
    SegmentationRequest,
    SegmentationResponse,
    SegmentedBox,
)

logger = logging.getLogger(__name__)

# (class_id, confidence, cx, cy, w, h); the last row sits below the default 0.25 threshold.
STUB_ANNOTATIONS: tuple[tuple[int, float, float, float, float, float], ...] = (
    (1, 0.91, 0.30, 0.40, 0.20, 0.30),
    (2, 0.64, 0.70, 0.60, 0.15, 0.20),
    (0, 0.12, 0.50, 0.85, 0.10, 0.10),
)
DETECTIONS_FILE = "detections.txt"
IMAGE_SMOOTHING_SIGMA = 4.0


def _write_response(response, output_dir: Path):
    text = json.dumps(response.model_dump(mode="json"), indent=2, sort_keys=True)
    (output_dir / RESPONSE_FILE).write_text(text + "\n")


def segment(request: SegmentationRequest, output_dir: Path):
    masks = []
    for i, b in enumerate(request.boxes):
        x1, y1, x2, y2 = BoundingBox(b.cx, b.cy, b.w, b.h).xyxy()
        masks.append(SegmentedBox(box_index=i, polygon=[(x1, y1), (x2, y1), (x2, y2), (x1, y2)]))
    _write_response(SegmentationResponse(masks=masks), output_dir)


def render_image(seed: int, width: int, height: int) -> np.ndarray:
    """Smoothed Gaussian noise in [0, 255], fully determined by `seed`."""
    rng = np.random.default_rng(seed)
    field = rng.normal(size=(height, width, 3))
    field = ndimage.gaussian_filter(field, sigma=(IMAGE_SMOOTHING_SIGMA, IMAGE_SMOOTHING_SIGMA, 0))
    field = (field - field.min()) / max(float(np.ptp(field)), 1e-12)
    return np.round(field * 255).astype(np.uint8)


def generate(request: GenerationRequest, output_dir: Path):
    images = []
    for i in range(request.count):
        seed = (request.seed + i) % 2**64
        name = f"image_{i:04d}.png"
        Image.fromarray(render_image(seed, request.width, request.height)).save(output_dir / name)
        images.append(GeneratedImage(file=name, seed=seed))
    _write_response(GenerationResponse(images=images), output_dir)


def annotate(request: AnnotationRequest, output_dir: Path):
    dets = [
        Detection(image.id, cls, conf, BoundingBox(cx, cy, w, h))
        for image in request.images
        for cls, conf, cx, cy, w, h in STUB_ANNOTATIONS
        if cls < len(request.class_names)
    ]
    write_detections_file(dets, output_dir / DETECTIONS_FILE)
    _write_response(AnnotationResponse(detections=DETECTIONS_FILE), output_dir)


def detect(request: DetectionRequest, output_dir: Path):
    """Every ground-truth box comes back with seeded jitter; one in ten is dropped."""
    test_path = Path(request.test_manifest)
    labeled = load_labeled_images(load_manifest(test_path), test_path.parent, len(request.class_names))
    rng = np.random.default_rng(request.seed)
    dets = []
    for truth in truths_from_labels(labeled):
        if rng.random() < 0.1:
            continue
        jx, jy = rng.normal(0, 0.01, size=2)
        box = BoundingBox(truth.box.cx + jx, truth.box.cy + jy, truth.box.w, truth.box.h)
        dets.append(Detection(truth.image_id, truth.class_id, float(rng.uniform(0.3, 1.0)), box))
    write_detections_file(dets, output_dir / DETECTIONS_FILE)
    _write_response(DetectionResponse(detections=DETECTIONS_FILE), output_dir)


ROLES = {
    "segmenter": (SegmentationRequest, segment),
    "generator": (GenerationRequest, generate),
    "annotator": (AnnotationRequest, annotate),
    "detector": (DetectionRequest, detect),
}


def stub_command(role: str) -> list[str]:
    return ["{python}", "-m", "app.adapters.stubs", role, "{request}", "{output_dir}"]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Deterministic stub adapters")
    parser.add_argument("role", choices=sorted(ROLES))
    parser.add_argument("request", type=Path)
    parser.add_argument("output_dir", type=Path)
    args = parser.parse_args(argv)

    request_model, handler = ROLES[args.role]
    try:
        request = request_model.model_validate_json(args.request.read_text())
        args.output_dir.mkdir(parents=True, exist_ok=True)
        handler(request, args.output_dir)
    except (OSError, ValidationError, HarnessError) as e:
        print(f"stub {args.role}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
