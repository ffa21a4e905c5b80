import math

import numpy as np
import pytest

from app.annotations.types import BoundingBox
from app.detection import (
    ConfusionCounts,
    Detection,
    EvalConfig,
    GroundTruth,
    average_precision,
    evaluate_detections,
    format_detections,
    iou,
    map_scores,
    match_detections,
    nms,
    parse_detections,
    pr_curve,
    prf,
    read_metric_csv,
    write_metric_csv,
)
from app.errors import InvalidSpec, MalformedLine, NoGroundTruth


def box(x1, y1, x2, y2):
    return BoundingBox.from_xyxy(x1, y1, x2, y2)


# --- Brute-force oracles ---


def oracle_iou(a, b):
    ax1, ay1, ax2, ay2 = a.xyxy()
    bx1, by1, bx2, by2 = b.xyxy()
    iw = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    ih = max(0.0, min(ay2, by2) - max(ay1, by1))
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0 else 0.0


def oracle_counts(dets, truths, thr):
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, -dets[i].box.area, i))
    used = set()
    tp = 0
    for i in order:
        d = dets[i]
        best, best_iou = None, -1.0
        for j, t in enumerate(truths):
            if j in used or t.image_id != d.image_id or t.class_id != d.class_id:
                continue
            o = oracle_iou(d.box, t.box)
            if o >= thr and o > best_iou:
                best, best_iou = j, o
        if best is not None:
            used.add(best)
            tp += 1
    return tp, len(dets) - tp, len(truths) - tp


def oracle_curve(dets, truths, cls, thr):
    dets = [d for d in dets if d.class_id == cls]
    truths = [t for t in truths if t.class_id == cls]
    if not truths:
        return []
    points = []
    for c in sorted({d.confidence for d in dets}, reverse=True):
        tp, fp, fn = oracle_counts([d for d in dets if d.confidence >= c], truths, thr)
        points.append((tp / (tp + fn), tp / (tp + fp)))
    return points


def oracle_ap(curve):
    total = 0.0
    for i in range(101):
        r = i / 100
        total += max([p for rec, p in curve if rec >= r], default=0.0)
    return total / 101


# --- IoU ---


def test_iou_identity_and_disjoint():
    a = box(0.1, 0.1, 0.4, 0.5)
    assert iou(a, a) == pytest.approx(1.0)
    assert iou(a, box(0.6, 0.6, 0.9, 0.9)) == 0.0


def test_iou_of_shifted_pixel_boxes():
    assert iou(box(0, 0, 2, 2), box(1, 0, 3, 2)) == pytest.approx(2 / 6)


def test_iou_is_symmetric_and_decreases_with_translation(rng):
    a = box(0.2, 0.2, 0.5, 0.5)
    previous = 1.0
    for dx in np.linspace(0, 0.4, 9):
        b = box(0.2 + dx, 0.2, 0.5 + dx, 0.5)
        assert iou(a, b) == pytest.approx(iou(b, a))
        assert iou(a, b) <= previous + 1e-12
        previous = iou(a, b)


# --- NMS ---


def det(conf, b, cls=0, image="i"):
    return Detection(image, cls, conf, b)


def test_nms_drops_duplicate():
    b = box(0.1, 0.1, 0.3, 0.3)
    kept = nms([det(0.8, b), det(0.9, b)], 0.5)
    assert [d.confidence for d in kept] == [0.9]


def test_nms_keeps_disjoint():
    kept = nms([det(0.9, box(0, 0, 0.2, 0.2)), det(0.8, box(0.5, 0.5, 0.7, 0.7))], 0.5)
    assert len(kept) == 2


def test_nms_chain_keeps_ends():
    a = det(0.9, box(0.0, 0.0, 0.4, 0.4))
    b = det(0.8, box(0.2, 0.0, 0.6, 0.4))
    c = det(0.7, box(0.4, 0.0, 0.8, 0.4))
    assert iou(a.box, b.box) > 0.3 and iou(b.box, c.box) > 0.3 and iou(a.box, c.box) == 0.0
    assert nms([c, a, b], 0.3) == [a, c]


def test_nms_only_suppresses_within_class():
    b = box(0.1, 0.1, 0.3, 0.3)
    assert len(nms([det(0.9, b, cls=0), det(0.8, b, cls=1)], 0.5)) == 2


def test_nms_survivors_do_not_overlap(scene):
    dets, _ = scene
    image_dets = [d for d in dets if d.image_id == "img00"]
    kept = nms(image_dets, 0.3)
    assert set(kept) <= set(image_dets)
    for i, a in enumerate(kept):
        for b in kept[i + 1 :]:
            if a.class_id == b.class_id:
                assert iou(a.box, b.box) <= 0.3
    assert [d.confidence for d in kept] == sorted((d.confidence for d in kept), reverse=True)


# --- Matching and PRF ---


def test_exact_match():
    b = box(0.1, 0.1, 0.3, 0.3)
    result = match_detections([det(0.9, b)], [GroundTruth("i", 0, b)], 0.5)
    assert result.counts == ConfusionCounts(1, 0, 0)


def test_second_detection_on_same_truth_is_false_positive():
    b = box(0.1, 0.1, 0.3, 0.3)
    result = match_detections([det(0.9, b), det(0.6, b)], [GroundTruth("i", 0, b)], 0.5)
    assert result.counts == ConfusionCounts(1, 1, 0)
    assert result.matches[1].truth_index is None


def test_matching_equals_brute_force(scene):
    dets, truths = scene
    for thr in (0.3, 0.5, 0.75):
        counts = match_detections(dets, truths, thr).counts
        assert (counts.tp, counts.fp, counts.fn) == oracle_counts(dets, truths, thr)


def test_tp_plus_fn_is_truth_count_per_class(make_scene):
    for _ in range(5):
        dets, truths = make_scene()
        for c in range(3):
            counts = match_detections(dets, truths, 0.5, class_id=c).counts
            assert counts.tp + counts.fn == sum(t.class_id == c for t in truths)


def test_prf_values():
    assert prf(ConfusionCounts(3, 1, 1)) == pytest.approx((0.75, 0.75, 0.75))
    p = prf(ConfusionCounts(5, 5, 0))
    assert (p.precision, p.recall) == (0.5, 1.0)
    assert p.f1 == pytest.approx(2 / 3)


def test_prf_undefined():
    p = prf(ConfusionCounts(0, 0, 4))
    assert p.precision is None
    assert p.recall == 0.0
    assert p.f1 is None


def test_f1_undefined_when_nothing_matches():
    p = prf(ConfusionCounts(0, 1, 1))
    assert p.precision == 0.0
    assert p.recall == 0.0
    assert p.f1 is None


# --- PR curve and AP ---


def test_perfect_single_detection_curve():
    b = box(0.1, 0.1, 0.3, 0.3)
    curve = pr_curve([det(0.9, b)], [GroundTruth("i", 0, b)], 0, 0.5)
    assert curve == [(1.0, 1.0)]
    assert average_precision(curve) == 1.0


def test_no_detections_curve():
    curve = pr_curve([], [GroundTruth("i", 0, box(0.1, 0.1, 0.3, 0.3))], 0, 0.5)
    assert curve == []
    assert average_precision(curve) == 0.0


def test_mixed_curve_matches_cutoff_enumeration():
    t1, t2 = box(0.1, 0.1, 0.3, 0.3), box(0.6, 0.6, 0.8, 0.8)
    truths = [GroundTruth("i", 0, t1), GroundTruth("i", 0, t2)]
    dets = [det(0.9, t1), det(0.7, box(0.4, 0.0, 0.5, 0.1)), det(0.5, t2)]
    curve = pr_curve(dets, truths, 0, 0.5)
    flat = [v for point in curve for v in point]
    assert flat == pytest.approx([0.5, 1.0, 0.5, 0.5, 1.0, 2 / 3])
    assert flat == pytest.approx([v for point in oracle_curve(dets, truths, 0, 0.5) for v in point])


def test_curve_recall_is_non_decreasing(scene):
    dets, truths = scene
    for c in range(3):
        recalls = [r for r, _ in pr_curve(dets, truths, c, 0.5)]
        assert recalls == sorted(recalls)


def test_two_point_ap():
    assert average_precision([(0.5, 1.0), (1.0, 0.5)]) == pytest.approx((51 * 1.0 + 50 * 0.5) / 101)


def test_ap_matches_direct_summation(scene):
    dets, truths = scene
    for c in range(3):
        for thr in (0.5, 0.75):
            curve = oracle_curve(dets, truths, c, thr)
            assert average_precision(pr_curve(dets, truths, c, thr)) == pytest.approx(oracle_ap(curve), abs=1e-12)


# --- mAP ---


def test_perfect_detections_give_unit_map(scene):
    _, truths = scene
    dets = [Detection(t.image_id, t.class_id, 0.9, t.box) for t in truths]
    scores = map_scores(dets, truths, EvalConfig())
    assert scores.map50 == pytest.approx(1.0)
    assert scores.map50_95 == pytest.approx(1.0)


def test_no_detections_give_zero_map(scene):
    _, truths = scene
    scores = map_scores([], truths, EvalConfig())
    assert (scores.map50, scores.map50_95) == (0.0, 0.0)


def test_map_requires_ground_truth():
    with pytest.raises(NoGroundTruth):
        map_scores([det(0.9, box(0, 0, 0.1, 0.1))], [], EvalConfig())


def test_map_matches_brute_force(scene):
    dets, truths = scene
    config = EvalConfig()
    scores = map_scores(dets, truths, config)
    classes = sorted({t.class_id for t in truths})
    per_t = [np.mean([oracle_ap(oracle_curve(dets, truths, c, t)) for c in classes]) for t in config.iou_thresholds]
    assert scores.map50 == pytest.approx(per_t[0], abs=1e-9)
    assert scores.map50_95 == pytest.approx(np.mean(per_t), abs=1e-9)
    assert scores.map50_95 <= scores.map50 + 1e-12


def test_ap_is_rank_invariant(scene):
    dets, truths = scene
    squashed = [Detection(d.image_id, d.class_id, math.sqrt(d.confidence) / 2, d.box) for d in dets]
    expected = map_scores(dets, truths, EvalConfig()).map50
    assert map_scores(squashed, truths, EvalConfig()).map50 == pytest.approx(expected)


def test_classes_without_truth_are_excluded():
    b = box(0.1, 0.1, 0.3, 0.3)
    dets = [det(0.9, b), det(0.9, box(0.5, 0.5, 0.7, 0.7), cls=2)]
    scores = map_scores(dets, [GroundTruth("i", 0, b)], EvalConfig())
    assert list(scores.per_class) == [0]
    assert scores.map50 == 1.0


def test_eval_config_validation():
    with pytest.raises(InvalidSpec):
        EvalConfig(iou_thresholds=(0.5, 0.5))
    with pytest.raises(InvalidSpec):
        EvalConfig(iou_thresholds=(0.0, 0.5))


# --- Reports and files ---


def test_evaluate_detections_rows(scene, tmp_path):
    dets, truths = scene
    rows = evaluate_detections(dets, truths, EvalConfig(), class_names=["sugar_beet", "monocot", "dicot"])
    by_key = {(r.metric, r.class_name): r for r in rows}
    assert by_key[("mAP50", "all")].threshold == "0.50"
    assert by_key[("mAP50_95", "all")].threshold == "0.50:0.95"
    assert ("F1", "dicot") in by_key or ("F1", "monocot") in by_key

    path = tmp_path / "metrics.csv"
    write_metric_csv(rows, path)
    frame = read_metric_csv(path)
    assert list(frame.columns) == ["metric", "class", "threshold", "value"]
    assert len(frame) == len(rows)


def test_detection_file_round_trip(scene):
    dets, _ = scene
    text = format_detections(dets[:5])
    assert format_detections(parse_detections(text)) == text


def test_detection_file_rejects_bad_lines():
    with pytest.raises(MalformedLine):
        parse_detections("img 0 0.9 0.5 0.5 0.1\n")
    with pytest.raises(MalformedLine):
        parse_detections("img 0 1.5 0.5 0.5 0.1 0.1\n")
