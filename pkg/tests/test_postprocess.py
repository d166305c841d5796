"""Tests of scoring, score filtering, and NMS."""
import pytest
import numpy as np
from yoloscenes import (BoundingBox, ScoredDetection, GridConfig, DetectionTensor,
                        GroundTruthObject, encode, iou, PostprocessConfig, class_confidence,
                        filter_by_score, nms, detect, detections_to_jsonl, detections_from_jsonl)
from yoloscenes.selfcheck import random_detections, brute_force_nms


@pytest.fixture
def box():
    """A box in the middle of the image."""
    return BoundingBox(0.5, 0.5, 0.3, 0.3)


@pytest.fixture
def rng():
    """A seeded random number generator."""
    return np.random.default_rng(99)


def test_class_confidence():
    assert np.allclose(class_confidence([1, 0], 0.5), [0.5, 0])
    assert np.allclose(class_confidence([0.8, 0.2], 0), [0, 0])
    assert np.allclose(class_confidence([0.8, 0.2], 0.5), [0.4, 0.1])
    with pytest.raises(ValueError):
        class_confidence([1.2, 0], 0.5)


def test_filter_by_score(box):
    dets = [ScoredDetection(box, 0, s) for s in (0.1, 0.2, 0.3)]
    assert filter_by_score(dets, 0.0) == dets
    assert filter_by_score(dets, 1.01) == []
    assert [d.score for d in filter_by_score(dets, 0.2)] == [0.2, 0.3]


def test_nms_examples(box):
    one = ScoredDetection(box, 0, 0.7)
    assert nms([one], 0.5) == [one]

    a, b = ScoredDetection(box, 0, 0.8), ScoredDetection(box, 0, 0.9)
    assert nms([a, b], 0.5) == [b]

    c = ScoredDetection(box, 1, 0.8)
    assert nms([a, c], 0.5) == [a, c]


def test_nms_tie_order(box):
    far = BoundingBox(0.1, 0.1, 0.1, 0.1)
    a, b = ScoredDetection(far, 0, 0.5), ScoredDetection(box, 0, 0.5)
    assert nms([a, b], 0.5) == [a, b]
    assert nms([b, a], 0.5) == [b, a]
    # identical boxes with tied scores keep the first
    c = ScoredDetection(box, 0, 0.5)
    assert nms([c, b], 0.5) == [c]


def test_nms_properties(rng):
    for _ in range(200):
        dets = random_detections(rng, int(rng.integers(1, 11)))
        t = float(rng.uniform(0.2, 0.7))
        kept = nms(dets, t)
        assert kept == brute_force_nms(dets, t)
        assert kept == nms(dets, t)
        for i, k in enumerate(kept):
            assert all(iou(k.box, j.box) <= t for j in kept[i+1:] if j.category == k.category)
        for d in dets:
            if d not in kept:
                assert any(k.category == d.category and k.score >= d.score
                           and iou(k.box, d.box) > t for k in kept)


def test_detect_empty():
    assert detect(DetectionTensor.zeros(GridConfig())) == []


def test_detect_one_object():
    truth = BoundingBox(0.3, 0.6, 0.2, 0.3)
    dets = detect(encode([GroundTruthObject(truth, 14)]), PostprocessConfig(0.2, 0.5))
    assert len(dets) == 1
    assert dets[0].category == 14
    assert dets[0].score == 1.0
    assert np.allclose(dets[0].box.as_array(), truth.as_array(), rtol=0, atol=1e-12)


def test_detect_two_objects():
    objects = [GroundTruthObject(BoundingBox(0.2, 0.2, 0.1, 0.1), 6),
               GroundTruthObject(BoundingBox(0.8, 0.7, 0.2, 0.1), 14)]
    dets = detect(encode(objects))
    assert sorted(d.category for d in dets) == [6, 14]


def test_score_threshold_monotone(rng):
    config = GridConfig(2, 2, 3)
    tensor = DetectionTensor(config, rng.uniform(0, 1, config.length))
    results = [detect(tensor, PostprocessConfig(t, 0.5)) for t in (0.0, 0.2, 0.5, 0.9)]
    for lower, higher, t in zip(results, results[1:], (0.2, 0.5, 0.9)):
        assert set(higher) <= set(lower)
        assert higher == [d for d in lower if d.score >= t]


def test_detect_oversized_prediction():
    config = GridConfig(1, 1, 1)
    assert detect(DetectionTensor(config, [0.5, 0.5, 1.2, 0.4, 0.01, 0.5])) == []
    dets = detect(DetectionTensor(config, [0.5, 0.5, 1.2, 0.4, 1.0, 1.0]))
    assert len(dets) == 1
    assert np.allclose(dets[0].box.as_array(), [0.5, 0.5, 1.0, 0.4])


def test_jsonl(box):
    dets = [ScoredDetection(box, 3, 0.75), ScoredDetection(BoundingBox(0.1, 0.2, 0.1, 0.1), 0, 1)]
    text = detections_to_jsonl(dets)
    assert text.count('\n') == 2
    assert '"class": 3' in text
    assert detections_from_jsonl(text) == dets
