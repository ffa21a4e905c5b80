import json
import logging

import pytest
from pydantic import ValidationError

from app.adapters import BoxPrompt, GenerationRequest, SegmentationRequest, SegmentationResponse
from app.adapters.stubs import STUB_ANNOTATIONS, stub_command
from app.annotations.types import BoundingBox, ImageRef, Instance, LabeledImage, Provenance
from app.errors import AdapterFailure, AdapterTimeout, SchemaViolation
from app.manifest import ManifestEntry
from app.services import adapter_service
from app.services.adapter_service import AdapterService
from app.settings import AdapterSpec
from app.stages import annotate_images, generate_images, segment_dataset

CLASS_NAMES = ["sugar_beet", "monocot", "dicot"]

# Adapter scripts run with `python -c`; braces are avoided because commands are str.format-ed.
SLEEP = "import time; time.sleep(10)"
FAIL = "import sys; sys.stderr.write('boom'); sys.exit(1)"
SILENT = "pass"
FLAKY = """
import json, pathlib, sys
out = pathlib.Path(sys.argv[1])
marker = out / 'attempted'
if not marker.exists():
    marker.write_text('1')
    sys.exit(1)
(out / 'response.json').write_text(json.dumps(dict(masks=[])))
"""
FIRST_BOX_ONLY = """
import json, pathlib, sys
out = pathlib.Path(sys.argv[1])
mask = dict(box_index=0, polygon=[[0.1, 0.1], [0.3, 0.1], [0.3, 0.3], [0.1, 0.3]])
(out / 'response.json').write_text(json.dumps(dict(masks=[mask])))
"""
EMPTY_ANNOTATIONS = """
import json, pathlib, sys
out = pathlib.Path(sys.argv[1])
(out / 'detections.txt').write_text('')
(out / 'response.json').write_text(json.dumps(dict(detections='detections.txt')))
"""


def _stub(role: str, timeout: float = 60.0) -> AdapterService:
    return AdapterService(AdapterSpec(role=role, command=stub_command(role), timeout=timeout))


def _script(role: str, source: str, timeout: float = 60.0, retry_attempts: int = 1) -> AdapterService:
    command = ["{python}", "-c", source, "{output_dir}"]
    return AdapterService(AdapterSpec(role=role, command=command, timeout=timeout, retry_attempts=retry_attempts))


def _segmentation_request(*boxes: BoundingBox) -> SegmentationRequest:
    return SegmentationRequest(
        image_path="/nowhere/image.png",
        width=64,
        height=64,
        boxes=[BoxPrompt(class_id=0, cx=b.cx, cy=b.cy, w=b.w, h=b.h) for b in boxes],
    )


def _labeled(image_id: str, *boxes: BoundingBox) -> LabeledImage:
    ref = ImageRef(image_id, f"images/{image_id}.png", 64, 64)
    return LabeledImage(ref, tuple(Instance(1, b) for b in boxes))


# --- Adapter service ---


def test_stub_segmenter_fills_the_box(tmp_path):
    response = _stub("segmenter").run(
        _segmentation_request(BoundingBox(0.5, 0.5, 0.2, 0.4)), SegmentationResponse, tmp_path / "seg"
    )
    assert len(response.masks) == 1
    corners = [c for vertex in response.masks[0].polygon for c in vertex]
    assert corners == pytest.approx([0.4, 0.3, 0.6, 0.3, 0.6, 0.7, 0.4, 0.7])
    assert (tmp_path / "seg" / "request.json").exists()


def test_failing_adapter_reports_exit_code_and_stderr(tmp_path):
    with pytest.raises(AdapterFailure) as info:
        _script("segmenter", FAIL).run(_segmentation_request(), SegmentationResponse, tmp_path)
    assert info.value.adapter_exit_code == 1
    assert "boom" in info.value.diagnostics


def test_slow_adapter_times_out(tmp_path):
    with pytest.raises(AdapterTimeout):
        _script("segmenter", SLEEP, timeout=0.5).run(_segmentation_request(), SegmentationResponse, tmp_path)


def test_missing_response_is_a_schema_violation(tmp_path):
    with pytest.raises(SchemaViolation):
        _script("segmenter", SILENT).run(_segmentation_request(), SegmentationResponse, tmp_path)


def test_invalid_response_is_a_schema_violation(tmp_path):
    source = "import pathlib, sys; (pathlib.Path(sys.argv[1]) / 'response.json').write_text('[1, 2]')"
    with pytest.raises(SchemaViolation):
        _script("segmenter", source).run(_segmentation_request(), SegmentationResponse, tmp_path)


def test_failed_attempt_is_retried(tmp_path, monkeypatch):
    monkeypatch.setattr(adapter_service, "RETRY_DELAY_SECONDS", 0.0)
    service = _script("segmenter", FLAKY, retry_attempts=2)
    response = service.run(_segmentation_request(), SegmentationResponse, tmp_path)
    assert response.masks == []


# --- Segmentation ---


def test_segment_dataset_gives_one_polygon_per_box(tmp_path):
    boxes = [BoundingBox(0.3, 0.3, 0.2, 0.2), BoundingBox(0.6, 0.6, 0.1, 0.3), BoundingBox(0.5, 0.2, 0.4, 0.1)]
    result, failures = segment_dataset([_labeled("a", *boxes)], tmp_path, _stub("segmenter"), tmp_path / "w")
    assert failures == 0
    instances = result[0].instances
    assert len(instances) == 3
    for inst, box in zip(instances, boxes, strict=True):
        assert inst.polygon is not None
        assert len(inst.polygon.vertices) == 4
        assert inst.box.xyxy() == pytest.approx(box.xyxy())


def test_segment_dataset_skips_images_without_boxes(tmp_path):
    empty = _labeled("empty")
    result, failures = segment_dataset([empty], tmp_path, _script("segmenter", FAIL), tmp_path / "w")
    assert result == [empty]
    assert failures == 0
    assert not (tmp_path / "w").exists()


def test_segmenter_timeout_keeps_the_rectangle(tmp_path):
    box = BoundingBox(0.5, 0.5, 0.2, 0.2)
    service = _script("segmenter", SLEEP, timeout=0.5)
    result, failures = segment_dataset([_labeled("a", box)], tmp_path, service, tmp_path / "w")
    assert failures == 1
    assert result[0].instances[0].polygon is None
    assert result[0].instances[0].box == box


def test_unanswered_box_is_counted(tmp_path):
    boxes = [BoundingBox(0.2, 0.2, 0.2, 0.2), BoundingBox(0.7, 0.7, 0.2, 0.2)]
    service = _script("segmenter", FIRST_BOX_ONLY)
    result, failures = segment_dataset([_labeled("a", *boxes)], tmp_path, service, tmp_path / "w")
    assert failures == 1
    first, second = result[0].instances
    assert first.polygon is not None
    assert second.polygon is None


# --- Generation ---


def test_generation_request_rejects_zero_steps():
    with pytest.raises(ValidationError):
        GenerationRequest(prompt="weeds", seed=0, steps=0)


def test_generate_stores_images_with_sidecars(tmp_path):
    prompt = "A Photo of HoPla Echinochloa, HoPla Plot in the Background"
    request = GenerationRequest(prompt=prompt, seed=11, count=2, width=32, height=32)
    entries = generate_images([request], _stub("generator"), tmp_path)
    assert [e.id for e in entries] == ["syn-000-0000", "syn-000-0001"]
    for e in entries:
        assert e.provenance is Provenance.SYNTHETIC
        assert (tmp_path / e.path).is_file()
        sidecar = json.loads((tmp_path / e.origin).read_text())
        assert sidecar["prompt"] == prompt
        assert sidecar["steps"] == 50
        assert (sidecar["width"], sidecar["height"]) == (32, 32)
    seeds = [json.loads((tmp_path / e.origin).read_text())["seed"] for e in entries]
    assert seeds == [11, 12]


def test_generation_is_reproducible_per_seed(tmp_path):
    request = GenerationRequest(prompt="weeds", seed=5, count=1, width=32, height=32)
    a = generate_images([request], _stub("generator"), tmp_path / "a")
    b = generate_images([request], _stub("generator"), tmp_path / "b")
    assert (tmp_path / "a" / a[0].path).read_bytes() == (tmp_path / "b" / b[0].path).read_bytes()


# --- Annotation ---


def _entries(*ids: str) -> list[ManifestEntry]:
    return [
        ManifestEntry(id=i, path=f"images/{i}.png", width=32, height=32, provenance=Provenance.SYNTHETIC) for i in ids
    ]


def test_annotations_follow_the_detection_table(tmp_path):
    labeled = annotate_images(_entries("s1", "s2"), tmp_path, _stub("annotator"), tmp_path / "w", CLASS_NAMES)
    expected = [(c, (cx, cy, w, h)) for c, conf, cx, cy, w, h in STUB_ANNOTATIONS if conf >= 0.25]
    for li in labeled:
        assert li.model_annotated
        got = [(inst.class_id, (inst.box.cx, inst.box.cy, inst.box.w, inst.box.h)) for inst in li.instances]
        assert len(got) == len(expected)
        for (gc, gbox), (ec, ebox) in zip(got, expected, strict=True):
            assert gc == ec
            assert gbox == pytest.approx(ebox, abs=1e-6)


def test_lower_threshold_keeps_low_confidence_annotations(tmp_path):
    labeled = annotate_images(
        _entries("s1"), tmp_path, _stub("annotator"), tmp_path / "w", CLASS_NAMES, threshold=0.1
    )
    assert len(labeled[0].instances) == len(STUB_ANNOTATIONS)


def test_image_without_detections_is_warned_about(tmp_path, caplog):
    service = _script("annotator", EMPTY_ANNOTATIONS)
    with caplog.at_level(logging.WARNING):
        labeled = annotate_images(_entries("s1"), tmp_path, service, tmp_path / "w", CLASS_NAMES)
    assert labeled[0].instances == ()
    assert "No detections" in caplog.text
