"""Normalised bounding boxes and intersection over union (IOU)."""

from dataclasses import dataclass
import numpy as np
from .utils import present_and_unit, DomainError


@dataclass(frozen=True)
class BoundingBox:
    """Centre-parameterised bounding box in normalised image coordinates.

    Attributes
    ----------
    x :
        Centre abscissa as a fraction of the image width, in [0, 1].
    y :
        Centre ordinate as a fraction of the image height, in [0, 1].
    w :
        Width as a fraction of the image width, in [0, 1].
    h :
        Height as a fraction of the image height, in [0, 1].

    Raises
    ------
    ValueError
        If any field is outside [0, 1].

    Notes
    -----
    The corner form is derived (see [to_corner_form][yoloscenes.geometry.to_corner_form]) and
    is not required to lie inside the image.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ('x', 'y', 'w', 'h'):
            object.__setattr__(self, name, float(getattr(self, name)))
        present_and_unit(vars(self), ['x', 'y', 'w', 'h'])

    @property
    def area(self) -> float:
        """Area of the box as a fraction of the image area."""
        left, top, right, bottom = to_corner_form(self)
        return (right - left) * (bottom - top)

    def as_array(self) -> np.ndarray:
        """The box as a float64 array of (x, y, w, h)."""
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)


@dataclass(frozen=True)
class ScoredDetection:
    """A box with a category and its category-specific confidence score.

    Attributes
    ----------
    box :
        The detected box.
    category :
        Category index (≥ 0 and less than the number of categories, C).
    score :
        Category-specific confidence, Pr(Class) × IOU, in [0, 1].
    """

    box: BoundingBox
    category: int
    score: float

    def __post_init__(self):
        object.__setattr__(self, 'score', float(self.score))
        if int(self.category) != self.category or self.category < 0:
            raise ValueError(f'Category must be a non-negative integer, not {self.category}.')
        object.__setattr__(self, 'category', int(self.category))
        present_and_unit(vars(self), ['score'])


def to_corner_form(b: BoundingBox) -> tuple[float, float, float, float]:
    """Corners of a box.

    Parameters
    ----------
    b :
        The box.

    Returns
    -------
    :
        (left, top, right, bottom) = (x − w/2, y − h/2, x + w/2, y + h/2).
    """
    return (b.x - b.w/2, b.y - b.h/2, b.x + b.w/2, b.y + b.h/2)


def from_corner_form(left: float, top: float, right: float, bottom: float) -> BoundingBox:
    """Box from its corners; the inverse of `to_corner_form()`.

    Parameters
    ----------
    left, top, right, bottom :
        Corner coordinates in normalised image units.

    Returns
    -------
    :
        The centre-parameterised box.

    Raises
    ------
    DomainError
        If the corners are not well-ordered.
    ValueError
        If the resulting box is not a valid `BoundingBox`.

    Notes
    -----
    `from_corner_form(*to_corner_form(b))` reproduces `b` exactly when its fields are dyadic
    rationals (e.g. 0.5, 0.25, 0.375). Otherwise the halving and re-adding in floating point
    can leave an error of up to about 1e-15 in each field.
    """
    if right < left or bottom < top:
        raise DomainError(f'Corners ({left}, {top}, {right}, {bottom}) are not well-ordered.')
    return BoundingBox((left + right)/2, (top + bottom)/2, right - left, bottom - top)


def clip_to_image(x: float, y: float, w: float, h: float) -> BoundingBox:
    """Box with centre (x, y) and size (w, h), clipped to the image [0, 1]².

    Parameters
    ----------
    x, y :
        Centre, which may lie outside the image.
    w, h :
        Width and height; must not be negative.

    Returns
    -------
    :
        The part of the box inside the image. A box entirely outside the image gives a
        zero-area box on the nearest image border.

    Raises
    ------
    DomainError
        If `w` or `h` is negative.
    """
    if w < 0 or h < 0:
        raise DomainError(f'Box size ({w}, {h}) is negative.')
    left, right = np.clip([x - w/2, x + w/2], 0.0, 1.0)
    top, bottom = np.clip([y - h/2, y + h/2], 0.0, 1.0)
    return BoundingBox((left + right)/2, (top + bottom)/2, right - left, bottom - top)


def box_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """IOU of centre-form boxes stored in arrays.

    No validation is done, so this also works on raw prediction values.

    Parameters
    ----------
    a, b :
        Arrays with a last dimension of 4 holding (x, y, w, h). Leading dimensions broadcast.

    Returns
    -------
    :
        The IOU of each pair of boxes. Pairs with a zero union area have an IOU of 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    a_left, a_top = a[..., 0] - a[..., 2]/2, a[..., 1] - a[..., 3]/2
    a_right, a_bottom = a[..., 0] + a[..., 2]/2, a[..., 1] + a[..., 3]/2
    b_left, b_top = b[..., 0] - b[..., 2]/2, b[..., 1] - b[..., 3]/2
    b_right, b_bottom = b[..., 0] + b[..., 2]/2, b[..., 1] + b[..., 3]/2

    inter_w = np.clip(np.minimum(a_right, b_right) - np.maximum(a_left, b_left), 0.0, None)
    inter_h = np.clip(np.minimum(a_bottom, b_bottom) - np.maximum(a_top, b_top), 0.0, None)
    inter = inter_w * inter_h

    # Areas come from the corners so that identical boxes give an IOU of exactly 1
    union = (a_right - a_left)*(a_bottom - a_top) + (b_right - b_left)*(b_bottom - b_top) - inter

    return np.divide(inter, union, out=np.zeros_like(inter), where=union > 0.0)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes.

    Parameters
    ----------
    a, b :
        The boxes.

    Returns
    -------
    :
        Intersection area divided by union area, in [0, 1]. Zero if the union area is zero.
    """
    return float(box_iou(a.as_array(), b.as_array()))
