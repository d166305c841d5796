"""Category-specific scoring, score filtering, and non-max suppression (NMS)."""

from dataclasses import dataclass
from itertools import groupby
import json
import numpy as np
from .geometry import BoundingBox, ScoredDetection, iou
from .gridcodec import DetectionTensor, decode
from .utils import present_and_unit


@dataclass(frozen=True)
class PostprocessConfig:
    """Thresholds used to turn a prediction tensor into final detections.

    Attributes
    ----------
    score_threshold :
        Detections with a category-specific score below this are discarded.
    nms_iou_threshold :
        Detections with an IOU above this against a higher scoring detection of the same
        category are suppressed.
    """

    score_threshold: float = 0.2
    nms_iou_threshold: float = 0.5

    def __post_init__(self):
        present_and_unit(vars(self), ['score_threshold', 'nms_iou_threshold'])


def class_confidence(class_probs, box_confidence: float) -> np.ndarray:
    """Category-specific confidence scores of one box.

    Parameters
    ----------
    class_probs :
        The C conditional class probabilities, Pr(Class_i | Object).
    box_confidence :
        The box confidence, Pr(Object) × IOU.

    Returns
    -------
    :
        Pr(Class_i | Object) × Pr(Object) × IOU = Pr(Class_i) × IOU for each category.

    Raises
    ------
    ValueError
        If a probability or the confidence is outside [0, 1].
    """
    p = np.asarray(class_probs, dtype=np.float64)
    present_and_unit({'class_probs': p, 'box_confidence': box_confidence},
                     ['class_probs', 'box_confidence'])
    return p * box_confidence


def filter_by_score(detections: list[ScoredDetection], threshold: float) \
        -> list[ScoredDetection]:
    """Keep the detections whose score is at least `threshold`, in input order."""
    return [d for d in detections if d.score >= threshold]


def nms(detections: list[ScoredDetection], iou_threshold: float) -> list[ScoredDetection]:
    """Greedy per-category non-max suppression.

    Parameters
    ----------
    detections :
        The detections.
    iou_threshold :
        A detection is suppressed if its IOU with an already kept detection of the same
        category is strictly greater than this.

    Returns
    -------
    :
        The kept detections, sorted by descending score with ties in input order.

    Notes
    -----
    Within each category the highest scoring remaining detection is kept and everything that
    overlaps it by more than the threshold is removed; this repeats until no detections remain.
    Detections of different categories never suppress each other.
    """
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))

    kept = []
    by_category = sorted(order, key=lambda i: detections[i].category)  # stable, keeps order
    for _, members in groupby(by_category, key=lambda i: detections[i].category):
        survivors = []
        for i in members:
            if all(iou(detections[i].box, detections[k].box) <= iou_threshold
                   for k in survivors):
                survivors.append(i)
        kept.extend(survivors)

    return [detections[i] for i in sorted(kept, key=lambda i: (-detections[i].score, i))]


def detect(tensor: DetectionTensor, config: PostprocessConfig = PostprocessConfig()) \
        -> list[ScoredDetection]:
    """Final detections from a prediction tensor.

    Decodes the tensor, scores every (predictor, category) pair with `class_confidence()`,
    then applies `filter_by_score()` and `nms()`.

    Parameters
    ----------
    tensor :
        The prediction tensor.
    config :
        The thresholds.

    Returns
    -------
    :
        The detections, sorted by descending score.

    Raises
    ------
    ShapeError
        If the tensor length does not match its configuration.
    DomainError
        If a predicted width or height is negative.
    """
    candidates = []
    for cell in decode(tensor):
        for box, conf in zip(cell.boxes, cell.confidences):
            for category, score in enumerate(class_confidence(cell.class_probs, conf)):
                candidates.append(ScoredDetection(box, category, score))

    return nms(filter_by_score(candidates, config.score_threshold), config.nms_iou_threshold)


def detections_to_jsonl(detections: list[ScoredDetection]) -> str:
    """Detections as JSON lines of `{"class", "score", "box": [x, y, w, h]}`."""
    return ''.join(json.dumps({'class': d.category, 'score': d.score,
                               'box': [d.box.x, d.box.y, d.box.w, d.box.h]}) + '\n'
                   for d in detections)


def detections_from_jsonl(text: str) -> list[ScoredDetection]:
    """Detections from JSON lines as written by `detections_to_jsonl()`."""
    out = []
    for line in text.splitlines():
        if line.strip():
            d = json.loads(line)
            out.append(ScoredDetection(BoundingBox(*d['box']), d['class'], d['score']))
    return out
