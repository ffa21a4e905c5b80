"""
Builds the desk-scale fixture: 40 labelled real images, a synthetic pool with generation
sidecars, and offline detection files for every (model, proportion, replicate).

Detections are exact copies of the test split's ground truth, so precision is 1 and
recall is (n - k) / n where k truths are withheld:

    k = model_index + round(4 * p) + (replicate % 2)      (k = model_index for p = 0)

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from app.adapters.stubs import render_image
from app.annotations.labels import write_labels
from app.annotations.types import TARGET_CLASSES, BoundingBox, ImageRef, Instance, LabeledImage, Provenance
from app.detection.io import truths_from_labels, write_detections_file
from app.detection.types import Detection
from app.errors import HarnessError
from app.manifest import Manifest, ManifestEntry, dump_json, save_manifest
from app.sampling.splitter import SplitSpec, split_dataset

logger = logging.getLogger("make_fixture")

REAL_IMAGES = 40
SYNTHETIC_IMAGES = 30
IMAGE_SIZE = 64
DEFAULT_MODELS = ("yolov8s", "yolov9s")
DEFAULT_P_VALUES = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_REPLICATES = 10
FIXTURE_PROMPT = "A Photo of HoPla Echinochloa, HoPla Plot in the Background"


@dataclass(frozen=True)
class FixturePaths:
    dataset_root: Path
    synthetic_manifest: Path
    detections_dir: Path


def plan_id(p: float, replicate: int) -> str:
    return f"p{round(p * 100):03d}_r{replicate:02d}"


def withheld(model_index: int, p: float, replicate: int) -> int:
    """Number of test truths left undetected for one (model, p, replicate)."""
    if p == 0:
        return model_index
    return model_index + round(4 * p) + replicate % 2


def _random_instances(rng: np.random.Generator, low: int, high: int) -> tuple[Instance, ...]:
    instances = []
    for _ in range(int(rng.integers(low, high + 1))):
        cx, cy = rng.uniform(0.2, 0.8, size=2)
        w, h = rng.uniform(0.1, 0.3, size=2)
        class_id = int(rng.integers(0, len(TARGET_CLASSES)))
        instances.append(Instance(class_id, BoundingBox(round(cx, 4), round(cy, 4), round(w, 4), round(h, 4))))
    return tuple(instances)


def _write_image(path: Path, seed: int):
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(render_image(seed, IMAGE_SIZE, IMAGE_SIZE)).save(path)


def build_real(root: Path, seed: int) -> list[LabeledImage]:
    rng = np.random.default_rng(seed)
    entries, labeled = [], []
    for i in range(REAL_IMAGES):
        image_id = f"real-{i:03d}"
        _write_image(root / "images" / f"{image_id}.png", seed * 1000 + i)
        ref = ImageRef(image_id, f"images/{image_id}.png", IMAGE_SIZE, IMAGE_SIZE)
        # At least two boxes per image keeps enough test truths for every withheld count.
        item = LabeledImage(ref, _random_instances(rng, 2, 3))
        write_labels(item, root / "labels" / f"{image_id}.txt")
        entries.append(
            ManifestEntry(
                id=image_id,
                path=ref.path,
                width=IMAGE_SIZE,
                height=IMAGE_SIZE,
                labels_path=f"labels/{image_id}.txt",
            )
        )
        labeled.append(item)
    save_manifest(Manifest(images=entries, meta={"source": "fixture"}), root / "manifest.json")
    logger.info(f"📷 {REAL_IMAGES} real images in {root}")
    return labeled


def build_synthetic(root: Path, seed: int) -> Path:
    rng = np.random.default_rng(seed + 1)
    entries = []
    for i in range(SYNTHETIC_IMAGES):
        image_id = f"fixture-syn-{i:03d}"
        image_seed = seed * 1000 + 500 + i
        _write_image(root / "images" / f"{image_id}.png", image_seed)
        ref = ImageRef(image_id, f"images/{image_id}.png", IMAGE_SIZE, IMAGE_SIZE, Provenance.SYNTHETIC)
        write_labels(LabeledImage(ref, _random_instances(rng, 1, 3), True), root / "labels" / f"{image_id}.txt")
        dump_json(
            {
                "id": image_id,
                "generator": "fixture",
                "prompt": FIXTURE_PROMPT,
                "seed": image_seed,
                "steps": 50,
                "guidance": 7.5,
                "scheduler": "euler-ancestral",
                "width": IMAGE_SIZE,
                "height": IMAGE_SIZE,
            },
            root / "images" / f"{image_id}.json",
        )
        entries.append(
            ManifestEntry(
                id=image_id,
                path=ref.path,
                width=IMAGE_SIZE,
                height=IMAGE_SIZE,
                provenance=Provenance.SYNTHETIC,
                labels_path=f"labels/{image_id}.txt",
                annotated_by="model",
                origin=f"images/{image_id}.json",
            )
        )
    path = root / "manifest.json"
    save_manifest(Manifest(images=entries, meta={"source": "fixture"}), path)
    logger.info(f"🎨 {SYNTHETIC_IMAGES} synthetic images in {root}")
    return path


def build_detections(
    root: Path,
    labeled: list[LabeledImage],
    split: SplitSpec,
    models: tuple[str, ...],
    p_values: tuple[float, ...],
    replicates: int,
):
    by_id = {li.image.id: li for li in labeled}
    test = [by_id[i] for i in split_dataset(list(by_id), split).test]
    truths = sorted(truths_from_labels(test), key=lambda t: (t.image_id, t.class_id, t.box.cx, t.box.cy))

    count = 0
    for model_index, model in enumerate(models):
        for p in (0.0, *p_values):
            for rep in range(replicates):
                k = withheld(model_index, p, rep)
                if k >= len(truths):
                    raise HarnessError(f"only {len(truths)} test truths, cannot withhold {k}")
                dets = [
                    Detection(t.image_id, t.class_id, max(0.3, 0.95 - 0.01 * i), t.box)
                    for i, t in enumerate(truths[k:])
                ]
                write_detections_file(dets, root / model / f"{plan_id(p, rep)}.txt")
                count += 1
    logger.info(f"🔍 {count} detection files for {len(truths)} test truths in {root}")


def build_fixture(
    root: Path,
    seed: int = 0,
    split: SplitSpec = SplitSpec(),
    models: tuple[str, ...] = DEFAULT_MODELS,
    p_values: tuple[float, ...] = DEFAULT_P_VALUES,
    replicates: int = DEFAULT_REPLICATES,
) -> FixturePaths:
    """
    Writes the fixture under `root`: real/, synthetic/ and detections/.

    :param split: Must match the experiment's split, since detections target its test subset.
    """
    labeled = build_real(root / "real", seed)
    synthetic_manifest = build_synthetic(root / "synthetic", seed)
    build_detections(root / "detections", labeled, split, models, p_values, replicates)
    return FixturePaths(root / "real", synthetic_manifest, root / "detections")


def main():
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(description="Build the desk-scale fixture dataset")
    parser.add_argument("output", type=Path, nargs="?", default=Path("fixture"), help="Target directory")
    parser.add_argument("--seed", type=int, default=0, help="Image and label seed")
    parser.add_argument("--split-seed", type=int, default=0, help="Seed of the experiment's split")
    parser.add_argument("--models", nargs="+", default=list(DEFAULT_MODELS))
    parser.add_argument("--p-values", nargs="+", type=float, default=list(DEFAULT_P_VALUES))
    parser.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    args = parser.parse_args()

    try:
        paths = build_fixture(
            args.output,
            seed=args.seed,
            split=SplitSpec(seed=args.split_seed),
            models=tuple(args.models),
            p_values=tuple(p for p in args.p_values if p > 0),
            replicates=args.replicates,
        )
    except HarnessError as e:
        logger.error(f"❌ {e}")
        sys.exit(1)
    logger.info(f"✅ Fixture ready: {paths.dataset_root.parent}")


if __name__ == "__main__":
    main()
