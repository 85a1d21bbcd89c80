import json

import pytest
from hypothesis import given, settings, strategies as st

from augforge.evaluation import (
    IOU_THRESHOLDS,
    Detection,
    DetectionSet,
    EvaluationError,
    GroundTruthSet,
    _match,
    average_precision,
    evaluate,
    iou,
    load_detections,
    load_ground_truth,
)
from augforge.imaging import BBox
from oracles import THRESHOLDS, naive_map, random_fixture


def _single(gt_box, det_boxes):
    gt = GroundTruthSet({"a": [gt_box]})
    return gt, DetectionSet([Detection("a", b, s) for b, s in det_boxes])


def test_iou_examples():
    a = BBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BBox(20, 20, 30, 30)) == 0.0
    assert iou(a, BBox(10, 0, 20, 10)) == 0.0  # touching edges
    assert iou(a, BBox(5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-15)


def test_thresholds_are_the_ten_steps():
    assert list(IOU_THRESHOLDS) == THRESHOLDS


def test_second_detection_disjoint_keeps_ap_one():
    gt, det = _single(BBox(0, 0, 10, 10), [(BBox(0, 0, 10, 10), 0.9), (BBox(50, 50, 60, 60), 0.8)])
    assert average_precision(gt, det, 0, 0.5) == 1.0


def test_false_positive_first_halves_precision():
    gt, det = _single(BBox(0, 0, 10, 10), [(BBox(0, 0, 10, 10), 0.8), (BBox(50, 50, 60, 60), 0.9)])
    assert average_precision(gt, det, 0, 0.5) == pytest.approx(0.5)


def test_iou_point_six_gives_map_point_three():
    gt, det = _single(BBox(0, 0, 10, 10), [(BBox(0, 0, 10, 6), 0.7)])
    assert iou(gt.images["a"][0], det.detections[0].box) == 0.6
    rep = evaluate(gt, det)
    assert rep.mAP == 0.3
    assert rep.mAP50 == 1.0 and rep.mAP75 == 0.0
    assert rep.mean_iou == 0.6


def test_perfect_detector():
    gt, _ = random_fixture(3)
    det = DetectionSet([Detection(k, b, 1.0) for k, v in gt.images.items() for b in v])
    rep = evaluate(gt, det)
    assert rep.mAP == rep.mAP50 == rep.mAP75 == rep.mean_iou == 1.0
    for t in THRESHOLDS:
        for c in gt.classes:
            assert average_precision(gt, det, c, t) == 1.0


def test_no_detections():
    gt, _ = random_fixture(4)
    rep = evaluate(gt, DetectionSet([]))
    assert rep.mAP == 0.0 and rep.mean_iou == 0.0


def test_unknown_class_and_image():
    gt, det = _single(BBox(0, 0, 10, 10), [(BBox(0, 0, 10, 10), 0.5)])
    with pytest.raises(EvaluationError, match="unknown class"):
        average_precision(gt, det, 7, 0.5)
    bad = DetectionSet([Detection("ghost", BBox(0, 0, 1, 1), 0.5)])
    with pytest.raises(EvaluationError, match="ghost"):
        evaluate(gt, bad)


def test_score_out_of_range_rejected():
    with pytest.raises(EvaluationError):
        Detection("a", BBox(0, 0, 1, 1), 1.5)


def test_empty_ground_truth_rejected():
    with pytest.raises(EvaluationError):
        evaluate(GroundTruthSet({"a": []}), DetectionSet([]))


@pytest.mark.parametrize("seed", range(5))
def test_matches_naive_evaluator(seed):
    gt, det = random_fixture(seed)
    rep = evaluate(gt, det)
    assert rep.mAP == pytest.approx(naive_map(gt, det, THRESHOLDS), abs=1e-9)
    assert rep.mAP50 == pytest.approx(naive_map(gt, det, [0.5]), abs=1e-9)
    assert rep.mAP75 == pytest.approx(naive_map(gt, det, [0.75]), abs=1e-9)


def test_ap_nonincreasing_in_threshold():
    for seed in range(5):
        gt, det = random_fixture(seed)
        for c in gt.classes:
            aps = [average_precision(gt, det, c, t) for t in THRESHOLDS]
            assert all(a >= b for a, b in zip(aps, aps[1:]))


@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
@settings(max_examples=30, deadline=None)
def test_permutation_invariance_and_bounds(seed, rnd):
    gt, det = random_fixture(seed, n_images=8)
    shuffled = list(det.detections)
    rnd.shuffle(shuffled)
    a = evaluate(gt, det).to_dict()
    b = evaluate(gt, DetectionSet(shuffled)).to_dict()
    assert a == b
    for key in ("mAP", "mAP@50", "mAP@75", "mean_iou"):
        assert 0.0 <= a[key] <= 1.0


@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_raising_tp_score_never_lowers_ap(seed, bump):
    gt, det = random_fixture(seed, n_images=6, n_classes=1)
    order = sorted(
        (t for t in enumerate(det.detections) if t[1].box.class_id == 0),
        key=lambda t: (-t[1].score, t[1].image_id, t[0]),
    )
    tp, _, _ = _match(gt, det, 0, 0.5)
    hits = [j for (j, _), flag in zip(order, tp) if flag]
    if not hits:
        return
    i = hits[seed % len(hits)]
    d = det.detections[i]
    raised = list(det.detections)
    raised[i] = Detection(d.image_id, d.box, d.score + bump * (1.0 - d.score))
    assert average_precision(gt, DetectionSet(raised), 0, 0.5) >= average_precision(gt, det, 0, 0.5) - 1e-12


def test_subset_map_restricts_both_sides():
    gt = GroundTruthSet(
        {"l": [BBox(0, 0, 10, 10)], "s": [BBox(0, 0, 10, 10)]},
        {"l": "lightbox", "s": "sunlamp"},
    )
    det = DetectionSet([Detection("l", BBox(0, 0, 10, 10), 0.9)])
    rep = evaluate(gt, det)
    assert rep.subset_mAP == {"lightbox": 1.0, "sunlamp": 0.0}
    # recall tops out at 1/2: 51 of the 101 sampled recall levels score 1
    assert rep.mAP == pytest.approx(51 / 101)
    override = evaluate(gt, det, subsets={"l": "x", "s": "x"})
    assert override.subset_mAP == {"x": pytest.approx(51 / 101)}


def test_json_round_trip(tmp_path):
    gt, det = random_fixture(9, n_images=5)
    gt.sizes = {k: (100, 100) for k in gt.images}
    gp, dp = tmp_path / "gt.json", tmp_path / "det.json"
    gp.write_text(json.dumps(gt.to_dict()))
    dp.write_text(json.dumps(det.to_dict()))
    assert evaluate(load_ground_truth(gp), load_detections(dp)) == evaluate(gt, det)
    dp.write_text("{not json")
    with pytest.raises(EvaluationError, match="invalid JSON"):
        load_detections(dp)


def test_duplicate_image_in_ground_truth():
    doc = {"images": [{"id": "a", "boxes": []}, {"id": "a", "boxes": []}]}
    with pytest.raises(EvaluationError, match="duplicate"):
        GroundTruthSet.from_dict(doc)
