import numpy as np
import pytest

from app.annotations.types import BoundingBox
from app.detection.types import Detection, GroundTruth
from scripts.make_fixture_dataset import build_fixture


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260418)


def random_scene(rng: np.random.Generator, n_images: int = 5, n_classes: int = 3, boxes_per_image: int = 4):
    """Ground truths plus jittered, partly spurious detections over a few images."""
    truths: list[GroundTruth] = []
    dets: list[Detection] = []
    for i in range(n_images):
        image_id = f"img{i:02d}"
        for _ in range(boxes_per_image):
            cls = int(rng.integers(n_classes))
            cx, cy = rng.uniform(0.2, 0.8, size=2)
            w, h = rng.uniform(0.05, 0.3, size=2)
            truths.append(GroundTruth(image_id, cls, BoundingBox(cx, cy, w, h)))
            if rng.random() < 0.8:
                jx, jy = rng.normal(0, 0.02, size=2)
                dets.append(Detection(image_id, cls, float(rng.uniform(0.3, 1.0)), BoundingBox(cx + jx, cy + jy, w, h)))
        for _ in range(2):
            cls = int(rng.integers(n_classes))
            cx, cy = rng.uniform(0.2, 0.8, size=2)
            dets.append(Detection(image_id, cls, float(rng.uniform(0.0, 0.6)), BoundingBox(cx, cy, 0.1, 0.1)))
    return dets, truths


@pytest.fixture
def scene(rng):
    return random_scene(rng)


@pytest.fixture
def make_scene(rng):
    return lambda **kwargs: random_scene(rng, **kwargs)


FIXTURE_MODELS = ("yolov8s", "yolov9s")
FIXTURE_P_VALUES = (0.1, 0.5, 0.9)
FIXTURE_REPLICATES = 3


@pytest.fixture(scope="module")
def fixture_dataset(tmp_path_factory):
    """Small fixture: 40 real images, a synthetic pool and offline detections."""
    return build_fixture(
        tmp_path_factory.mktemp("fixture"),
        models=FIXTURE_MODELS,
        p_values=FIXTURE_P_VALUES,
        replicates=FIXTURE_REPLICATES,
    )
