"""Numerical self-checks of the detector core against independent oracles.

Each suite draws random instances from a seeded generator, runs the implementation under test
(passed in as a parameter so that deliberately broken versions can be checked too), and compares
it with a slow but obviously correct oracle.
"""

from dataclasses import dataclass
from collections.abc import Callable, Sequence
from math import ceil
import numpy as np
from tqdm import tqdm
from .geometry import BoundingBox, ScoredDetection, iou, to_corner_form
from .gridcodec import GridConfig, DetectionTensor, GroundTruthObject, encode
from .loss import LossWeights, assign_predictors, yolo_loss, loss_gradient
from .postprocess import nms

_BAR_FORMAT = '{l_bar}{bar} [{n_fmt}/{total_fmt}; {rate_noinv_fmt}]'


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one self-check suite.

    Attributes
    ----------
    name :
        Suite name.
    passed :
        True if every instance agreed with the oracle.
    instances :
        Number of random instances checked.
    detail :
        Description of the first disagreement, or a summary if there was none.
    """

    name: str
    passed: bool
    instances: int
    detail: str = ''


def _pixel_span(lo: float, hi: float, resolution: int) -> tuple[int, int]:
    """Indices [first, last) of the pixels whose centres lie in [lo, hi)."""
    return ceil(lo*resolution - 0.5), ceil(hi*resolution - 0.5)


def raster_iou(a: BoundingBox, b: BoundingBox, resolution: int = 1000) -> float:
    """IOU estimated by rasterising both boxes onto a pixel grid.

    Parameters
    ----------
    a, b :
        The boxes.
    resolution :
        Pixels per unit image width and height.

    Returns
    -------
    :
        Number of pixels covered by both boxes divided by the number covered by either. A
        pixel is covered if its centre is inside the box. Pixels outside the image are counted
        too.

    Notes
    -----
    Boxes are axis aligned, so the covered pixels along x and along y are each a contiguous run
    and the pixel counts are products of the run lengths.
    """
    def runs(box):
        left, top, right, bottom = to_corner_form(box)
        return _pixel_span(left, right, resolution), _pixel_span(top, bottom, resolution)

    def count(span):
        return max(0, span[1] - span[0])

    (ax, ay), (bx, by) = runs(a), runs(b)
    inter = (count((max(ax[0], bx[0]), min(ax[1], bx[1])))
             * count((max(ay[0], by[0]), min(ay[1], by[1]))))
    union = count(ax)*count(ay) + count(bx)*count(by) - inter
    return inter / union if union > 0 else 0.0


def brute_force_nms(detections: Sequence[ScoredDetection], iou_threshold: float) \
        -> list[ScoredDetection]:
    """Non-max suppression by exhaustive search over every subset of detections.

    Parameters
    ----------
    detections :
        The detections; practical for at most about 15.
    iou_threshold :
        Detections of the same category overlap if their IOU is strictly greater than this.

    Returns
    -------
    :
        The unique subset in which a detection is kept exactly when no kept detection of higher
        priority (higher score, then lower input index) overlaps it, sorted by descending score
        with ties in input order.
    """
    n = len(detections)
    priority = sorted(range(n), key=lambda i: (-detections[i].score, i))
    rank = {i: r for r, i in enumerate(priority)}

    higher = [0] * n  # bitmask of higher priority detections that would suppress i
    for i in range(n):
        for j in range(n):
            if (rank[j] < rank[i] and detections[i].category == detections[j].category
                    and iou(detections[i].box, detections[j].box) > iou_threshold):
                higher[i] |= 1 << j

    kept = [mask for mask in range(1 << n)
            if all(bool(mask >> i & 1) == (mask & higher[i] == 0) for i in range(n))]
    if len(kept) != 1:
        raise RuntimeError(f'Expected a single consistent subset, found {len(kept)}.')

    return [detections[i] for i in priority if kept[0] >> i & 1]


def finite_difference_gradient(prediction: DetectionTensor, target: DetectionTensor,
                               weights: LossWeights = LossWeights(), step: float = 1e-5,
                               loss_fn: Callable = yolo_loss) -> DetectionTensor:
    """Central finite-difference gradient of the total loss.

    Parameters
    ----------
    prediction :
        The predicted tensor.
    target :
        The target tensor.
    weights :
        The loss term weights.
    step :
        Finite-difference step.
    loss_fn :
        The loss function; called as `loss_fn(prediction, target, weights, assignment)` and
        must return an object with a `total` attribute.

    Returns
    -------
    :
        (L(v + step) − L(v − step)) / (2·step) for each value v of `prediction`.

    Notes
    -----
    The responsible predictors and their IOU confidence targets are fixed at those of the
    unperturbed prediction, so the confidence targets are treated as constants.
    """
    assignment = assign_predictors(prediction, target)
    base = prediction.values.copy()
    grad = np.zeros_like(base)
    for i in range(base.size):
        plus, minus = base.copy(), base.copy()
        plus[i] += step
        minus[i] -= step
        lp = loss_fn(DetectionTensor(prediction.config, plus), target, weights, assignment).total
        lm = loss_fn(DetectionTensor(prediction.config, minus), target, weights, assignment).total
        grad[i] = (lp - lm) / (2*step)
    return DetectionTensor(prediction.config, grad)


def random_target(rng: np.random.Generator, config: GridConfig,
                  occupancy: float = 0.5) -> DetectionTensor:
    """A target tensor with objects in a random subset of cells and sizes in [0.1, 1]."""
    S = config.S
    objects = []
    for row in range(S):
        for col in range(S):
            if rng.random() < occupancy:
                u, v = rng.uniform(0.05, 0.95, 2)
                w, h = rng.uniform(0.1, 1.0, 2)
                objects.append(GroundTruthObject(BoundingBox((col + u)/S, (row + v)/S, w, h),
                                                 int(rng.integers(config.C))))
    return encode(objects, config)


def random_prediction(rng: np.random.Generator, config: GridConfig) -> DetectionTensor:
    """A prediction tensor with offsets, confidences and probabilities in [0, 1] and sizes in
    [0.1, 1]."""
    c = config
    boxes = rng.uniform(0.0, 1.0, (c.S, c.S, c.B, 5))
    boxes[..., 2:4] = rng.uniform(0.1, 1.0, (c.S, c.S, c.B, 2))
    probs = rng.uniform(0.0, 1.0, (c.S, c.S, c.C))
    return DetectionTensor(c, np.concatenate([boxes.reshape(c.S, c.S, 5*c.B), probs], axis=-1))


def gradient_suite(loss_fn: Callable = yolo_loss, gradient_fn: Callable = loss_gradient,
                   seed: int = 0, instances: int = 20, progress: bool = False,
                   rtol: float = 1e-4, step: float = 1e-5) -> SuiteResult:
    """Compare the analytic loss gradient with central finite differences.

    Instances have S ≤ 4, B ≤ 2, and C ≤ 3. The relative error of each entry is
    |analytic − numeric| / max(|analytic|, |numeric|, 1e-3), so entries smaller than 1e-3 are
    compared absolutely.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in tqdm(range(instances), desc='gradient', unit=' instances', disable=not progress,
                  bar_format=_BAR_FORMAT):
        config = GridConfig(int(rng.integers(1, 5)), int(rng.integers(1, 3)),
                            int(rng.integers(1, 4)))
        target = random_target(rng, config)
        prediction = random_prediction(rng, config)

        analytic = gradient_fn(prediction, target).values
        numeric = finite_difference_gradient(prediction, target, step=step,
                                             loss_fn=loss_fn).values
        scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-3)
        err = np.abs(analytic - numeric) / scale
        worst = max(worst, float(err.max()))
        if err.max() >= rtol:
            i = int(np.argmax(err))
            return SuiteResult('gradient', False, k+1,
                               f'instance {k} (S={config.S}, B={config.B}, C={config.C}): entry '
                               f'{i} analytic {analytic[i]:.6g} vs numeric {numeric[i]:.6g}')

    return SuiteResult('gradient', True, instances, f'worst relative error {worst:.2e}')


def random_detections(rng: np.random.Generator, n: int, categories: int = 2) \
        -> list[ScoredDetection]:
    """Random detections clustered enough to overlap, with scores drawn so that ties occur."""
    out = []
    for _ in range(n):
        box = BoundingBox(*rng.uniform(0.3, 0.7, 2), *rng.uniform(0.1, 0.5, 2))
        score = rng.choice([0.3, 0.5, 0.7, 0.9]) if rng.random() < 0.5 else rng.random()
        out.append(ScoredDetection(box, int(rng.integers(categories)), score))
    return out


def nms_suite(nms_fn: Callable = nms, seed: int = 0, instances: int = 200,
              progress: bool = False, max_boxes: int = 10) -> SuiteResult:
    """Compare greedy NMS with the brute-force oracle on up to `max_boxes` boxes of 2 classes."""
    rng = np.random.default_rng(seed)
    for k in tqdm(range(instances), desc='nms', unit=' instances', disable=not progress,
                  bar_format=_BAR_FORMAT):
        detections = random_detections(rng, int(rng.integers(1, max_boxes+1)))
        threshold = float(rng.uniform(0.2, 0.7))
        got = nms_fn(detections, threshold)
        expected = brute_force_nms(detections, threshold)
        if got != expected:
            return SuiteResult('nms', False, k+1,
                               f'instance {k} ({len(detections)} boxes, threshold '
                               f'{threshold:.3f}): kept {len(got)}, oracle kept {len(expected)}'
                               ' or a different order')

    return SuiteResult('nms', True, instances, 'greedy NMS matches the oracle')


def iou_suite(iou_fn: Callable = iou, seed: int = 0, instances: int = 1000,
              progress: bool = False, resolution: int = 100_000,
              atol: float = 2e-3) -> SuiteResult:
    """Check IOU symmetry, range, identity, and agreement with the rasterisation oracle."""
    rng = np.random.default_rng(seed)
    for k in tqdm(range(instances), desc='iou', unit=' instances', disable=not progress,
                  bar_format=_BAR_FORMAT):
        a = BoundingBox(*rng.uniform(0.0, 1.0, 2), *rng.uniform(0.05, 1.0, 2))
        b = BoundingBox(*rng.uniform(0.0, 1.0, 2), *rng.uniform(0.05, 1.0, 2))
        ab, ba = iou_fn(a, b), iou_fn(b, a)
        problem = None
        if ab != ba:
            problem = f'not symmetric ({ab} vs {ba})'
        elif not 0.0 <= ab <= 1.0:
            problem = f'out of range ({ab})'
        elif iou_fn(a, a) != 1.0:
            problem = f'iou(a, a) = {iou_fn(a, a)}'
        elif abs(ab - raster_iou(a, b, resolution)) > atol:
            problem = f'{ab:.6f} vs raster oracle {raster_iou(a, b, resolution):.6f}'
        if problem:
            return SuiteResult('iou', False, k+1, f'instance {k}: {problem}')

    return SuiteResult('iou', True, instances, 'symmetry, range, identity, and raster agreement')


def run_selfcheck(seed: int = 0, progress: bool = False) -> list[SuiteResult]:
    """Run the gradient, NMS, and IOU suites with their default implementations."""
    return [gradient_suite(seed=seed, progress=progress),
            nms_suite(seed=seed, progress=progress),
            iou_suite(seed=seed, progress=progress)]
