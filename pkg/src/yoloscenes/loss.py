"""The five-part sum-squared error training loss of a grid-cell detector and its gradient."""

from dataclasses import dataclass, fields
from collections.abc import Sequence
import warnings
import numpy as np
from .geometry import BoundingBox, box_iou
from .gridcodec import DetectionTensor
from .utils import present_and_positive, ShapeError, DomainError, SingularityError


@dataclass(frozen=True)
class LossWeights:
    """Weights of the loss terms.

    Attributes
    ----------
    lambda_coord :
        Weight of the coordinate terms (centre and square-rooted size).
    lambda_noobj :
        Weight of the confidence term for predictors that are not responsible for an object.
    lambda_obj :
        Weight of the confidence term for responsible predictors.
    lambda_class :
        Weight of the classification term.
    """

    lambda_coord: float = 5.0
    lambda_noobj: float = 0.5
    lambda_obj: float = 1.0
    lambda_class: float = 1.0

    def __post_init__(self):
        names = [f.name for f in fields(self)]
        present_and_positive(vars(self), names, allow_zero=True)
        for name in names:
            object.__setattr__(self, name, float(getattr(self, name)))
            if getattr(self, name) == 0.0:
                warnings.warn(f'Loss weight {name} is zero so its term is disabled.')


@dataclass(frozen=True)
class LossBreakdown:
    """Loss split into its five terms.

    Attributes
    ----------
    coord_xy :
        Weighted squared error of the box centres.
    coord_wh :
        Weighted squared error of the square roots of the box widths and heights.
    conf_obj :
        Weighted squared error of the confidence of responsible predictors.
    conf_noobj :
        Weighted squared confidence of all other predictors.
    classification :
        Weighted squared error of the class probabilities of occupied cells.
    total :
        Sum of the five terms.
    """

    coord_xy: float
    coord_wh: float
    conf_obj: float
    conf_noobj: float
    classification: float
    total: float

    @classmethod
    def from_parts(cls, coord_xy, coord_wh, conf_obj, conf_noobj, classification):
        """Create a breakdown, computing the total from the parts."""
        parts = [float(p) for p in (coord_xy, coord_wh, conf_obj, conf_noobj, classification)]
        return cls(*parts, sum(parts))

    def as_dict(self) -> dict:
        """The breakdown as a dict."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, eq=False)
class PredictorAssignment:
    """Which predictor of each occupied cell is responsible for the object, and its target.

    Attributes
    ----------
    occupied :
        (S, S) boolean array; True where the target has an object.
    responsible :
        (S, S) array of responsible predictor indices (0 for unoccupied cells).
    iou_targets :
        (S, S) array of confidence targets, the IOU of the responsible predicted box and the
        ground-truth box (0 for unoccupied cells).
    """

    occupied: np.ndarray
    responsible: np.ndarray
    iou_targets: np.ndarray

    def mask(self, B: int) -> np.ndarray:
        """(S, S, B) boolean array that is True for responsible predictors."""
        return (np.arange(B) == self.responsible[..., None]) & self.occupied[..., None]


def _check_pair(prediction: DetectionTensor, target: DetectionTensor):
    if prediction.config != target.config:
        raise ShapeError(f'Prediction configuration {prediction.config} does not match '
                         f'target configuration {target.config}.')
    if np.any(prediction.box_values()[..., 2:4] < 0.0):
        raise DomainError('Predicted widths and heights must not be negative.')


def _truth(target: DetectionTensor) -> tuple[np.ndarray, np.ndarray]:
    """Occupied-cell mask and the (S, S, 5) ground-truth box of each cell."""
    tb = target.box_values()
    occupied = tb[..., 4].max(axis=-1) > 0.0
    slot = np.argmax(tb[..., 4], axis=-1)
    truth = np.take_along_axis(tb, slot[..., None, None], axis=2)[..., 0, :]
    return occupied, truth


def _to_image(values: np.ndarray, S: int) -> np.ndarray:
    """Convert (S, S, ..., ≥4) cell-relative box values to image-normalised (x, y, w, h)."""
    extra = (None,) * (values.ndim - 3)
    cols = np.arange(S)[(None, slice(None)) + extra]
    rows = np.arange(S)[(slice(None), None) + extra]
    return np.stack([(cols + values[..., 0])/S, (rows + values[..., 1])/S,
                     values[..., 2], values[..., 3]], axis=-1)


def assign_responsible_predictor(predicted_boxes: Sequence[BoundingBox],
                                 truth_box: BoundingBox) -> int:
    """Index of the predictor with the highest IOU against the ground truth.

    Parameters
    ----------
    predicted_boxes :
        The B predicted boxes of one cell.
    truth_box :
        The ground-truth box.

    Returns
    -------
    :
        The argmax over predictors of the IOU; ties go to the lowest index.

    Raises
    ------
    ValueError
        If no predicted boxes are given.
    """
    if len(predicted_boxes) == 0:
        raise ValueError('At least one predicted box is required.')
    ious = box_iou(np.array([b.as_array() for b in predicted_boxes]), truth_box.as_array())
    return int(np.argmax(ious))


def assign_predictors(prediction: DetectionTensor, target: DetectionTensor) \
        -> PredictorAssignment:
    """Responsible predictors and IOU confidence targets for every cell.

    Parameters
    ----------
    prediction :
        The predicted tensor.
    target :
        The target tensor (as produced by [encode][yoloscenes.gridcodec.encode]).

    Returns
    -------
    :
        The assignment, using the same argmax rule as `assign_responsible_predictor()`.

    Raises
    ------
    ShapeError
        If the tensors have different configurations.
    DomainError
        If any predicted width or height is negative.
    """
    _check_pair(prediction, target)
    S = prediction.config.S
    occupied, truth = _truth(target)

    pred_img = _to_image(prediction.box_values(), S)  # (S, S, B, 4)
    truth_img = _to_image(truth, S)  # (S, S, 4)
    ious = box_iou(pred_img, truth_img[:, :, None, :])

    responsible = np.where(occupied, np.argmax(ious, axis=-1), 0)
    iou_targets = np.take_along_axis(ious, responsible[..., None], axis=-1)[..., 0]
    return PredictorAssignment(occupied, responsible, np.where(occupied, iou_targets, 0.0))


def yolo_loss(prediction: DetectionTensor, target: DetectionTensor,
              weights: LossWeights = LossWeights(),
              assignment: PredictorAssignment | None = None) -> LossBreakdown:
    """Evaluate the sum-squared error detection loss.

    Parameters
    ----------
    prediction :
        The predicted tensor. Widths and heights must not be negative.
    target :
        The target tensor with the same grid configuration.
    weights :
        The term weights.
    assignment :
        Responsible predictors and confidence targets. If `None`, they are computed from
        `prediction` with `assign_predictors()`. Passing a fixed assignment holds the
        confidence targets constant.

    Returns
    -------
    :
        The five loss terms and their total.

    Raises
    ------
    ShapeError
        If the tensors have different configurations.
    DomainError
        If any predicted width or height is negative.

    Notes
    -----
    The terms are, with sums over occupied cells and their responsible predictor:

    - coord_xy = λ_coord Σ [(x − x̂)² + (y − ŷ)²], on the stored cell-relative offsets,
    - coord_wh = λ_coord Σ [(√w − √ŵ)² + (√h − √ĥ)²],
    - conf_obj = λ_obj Σ (IOU − Ĉ)², the target being the IOU of the predicted and true box,
    - conf_noobj = λ_noobj Σ Ĉ² over every predictor that is not responsible for an object,
    - classification = λ_class Σ_cells Σ_c (p(c) − p̂(c))².
    """
    _check_pair(prediction, target)
    if assignment is None:
        assignment = assign_predictors(prediction, target)

    c = prediction.config
    occ = assignment.occupied
    pb = prediction.box_values()
    _, truth = _truth(target)
    pr = np.take_along_axis(pb, assignment.responsible[..., None, None], axis=2)[..., 0, :]

    t, p = truth[occ], pr[occ]
    xy = np.sum((t[:, 0] - p[:, 0])**2 + (t[:, 1] - p[:, 1])**2)
    wh = np.sum((np.sqrt(t[:, 2]) - np.sqrt(p[:, 2]))**2 + (np.sqrt(t[:, 3]) - np.sqrt(p[:, 3]))**2)
    obj = np.sum((assignment.iou_targets[occ] - p[:, 4])**2)
    noobj = np.sum(pb[..., 4][~assignment.mask(c.B)]**2)
    cls = np.sum((target.class_values()[occ] - prediction.class_values()[occ])**2)

    return LossBreakdown.from_parts(weights.lambda_coord*xy, weights.lambda_coord*wh,
                                    weights.lambda_obj*obj, weights.lambda_noobj*noobj,
                                    weights.lambda_class*cls)


def loss_gradient(prediction: DetectionTensor, target: DetectionTensor,
                  weights: LossWeights = LossWeights(),
                  assignment: PredictorAssignment | None = None) -> DetectionTensor:
    """Analytic gradient of the total loss with respect to every prediction value.

    Parameters
    ----------
    prediction :
        The predicted tensor. Widths and heights of responsible predictors must be positive.
    target :
        The target tensor with the same grid configuration.
    weights :
        The term weights.
    assignment :
        As for `yolo_loss()`.

    Returns
    -------
    :
        A tensor of partial derivatives with the same configuration as `prediction`.

    Raises
    ------
    ShapeError
        If the tensors have different configurations.
    DomainError
        If any predicted width or height is negative.
    SingularityError
        If a responsible predictor has a zero width or height.

    Notes
    -----
    The IOU confidence target is treated as a constant (no gradient flows through it).
    """
    _check_pair(prediction, target)
    if assignment is None:
        assignment = assign_predictors(prediction, target)

    c = prediction.config
    occ = assignment.occupied
    resp = assignment.mask(c.B)
    pb = prediction.box_values()
    _, truth = _truth(target)
    pr = np.take_along_axis(pb, assignment.responsible[..., None, None], axis=2)[..., 0, :]

    if np.any(pr[occ][:, 2:4] == 0.0):
        raise SingularityError('The square root derivative is singular at a responsible '
                               'predictor with zero width or height.')

    lc = weights.lambda_coord
    sqrt_p = np.sqrt(pr[..., 2:4])
    sqrt_t = np.sqrt(truth[..., 2:4])
    g_wh = lc * np.divide(sqrt_p - sqrt_t, sqrt_p, out=np.zeros_like(sqrt_p),
                          where=occ[..., None])
    g_resp = np.concatenate([2*lc*(pr[..., 0:2] - truth[..., 0:2]), g_wh,
                             2*weights.lambda_obj*(pr[..., 4:5] -
                                                   assignment.iou_targets[..., None])], axis=-1)

    g_boxes = np.zeros_like(pb)
    g_boxes[..., 4] = np.where(resp, 0.0, 2*weights.lambda_noobj*pb[..., 4])
    g_boxes = np.where(resp[..., None], g_resp[:, :, None, :], g_boxes)

    g_cls = np.where(occ[..., None],
                     2*weights.lambda_class*(prediction.class_values() - target.class_values()),
                     0.0)

    cells = np.concatenate([g_boxes.reshape(c.S, c.S, 5*c.B), g_cls], axis=-1)
    return DetectionTensor(c, cells)
