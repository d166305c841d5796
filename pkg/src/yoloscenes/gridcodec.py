"""Encoding of ground truth into, and decoding of boxes from, grid-cell detection tensors.

The image is divided into S × S grid cells. Each cell holds a vector of 5B + C values: B boxes
of (x_offset, y_offset, w, h, confidence) followed by C class probabilities. The tensor is stored
flat in row-major cell order.
"""

from dataclasses import dataclass
from math import floor
from typing import NamedTuple
import numpy as np
from .geometry import BoundingBox, clip_to_image
from .utils import present_and_positive, ShapeError, DomainError, EncodingConflictError

VOC_CLASSES = ('aeroplane', 'bicycle', 'bird', 'boat', 'bottle', 'bus', 'car', 'cat', 'chair',
               'cow', 'diningtable', 'dog', 'horse', 'motorbike', 'person', 'pottedplant',
               'sheep', 'sofa', 'train', 'tvmonitor')
"""Category names for the default C = 20 configuration."""


@dataclass(frozen=True)
class GridConfig:
    """Detector output shape.

    Attributes
    ----------
    S :
        Grid side length; the image is divided into S × S cells.
    B :
        Number of boxes predicted by each cell.
    C :
        Number of categories.
    """

    S: int = 7
    B: int = 2
    C: int = 20

    def __post_init__(self):
        present_and_positive(vars(self), ['S', 'B', 'C'])
        for name in ('S', 'B', 'C'):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"Grid parameter '{name}' must be an integer.")
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def cell_width(self) -> int:
        """Number of values per cell (5B + C)."""
        return 5*self.B + self.C

    @property
    def length(self) -> int:
        """Number of values in a tensor (S·S·(5B + C))."""
        return self.S * self.S * self.cell_width


@dataclass(frozen=True, eq=False)
class DetectionTensor:
    """Flat S·S·(5B + C) array of detector outputs or training targets.

    Attributes
    ----------
    config :
        The grid configuration.
    values :
        The tensor values. Stored as a read-only float64 copy.

    Raises
    ------
    ShapeError
        If the number of values is not `config.length`.
    """

    config: GridConfig
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size != self.config.length:
            raise ShapeError(f'Tensor has {v.size} values but the grid configuration '
                             f'(S={self.config.S}, B={self.config.B}, C={self.config.C}) '
                             f'requires {self.config.length}.')
        v.flags.writeable = False
        object.__setattr__(self, 'values', v)

    @classmethod
    def zeros(cls, config: GridConfig):
        """An all-zero tensor for `config`."""
        return cls(config, np.zeros(config.length))

    def cells(self) -> np.ndarray:
        """The values as a (S, S, 5B + C) array view."""
        c = self.config
        return self.values.reshape(c.S, c.S, c.cell_width)

    def box_values(self) -> np.ndarray:
        """The box values as a (S, S, B, 5) array of (x_offset, y_offset, w, h, confidence)."""
        c = self.config
        return self.cells()[..., :5*c.B].reshape(c.S, c.S, c.B, 5)

    def class_values(self) -> np.ndarray:
        """The class probabilities as a (S, S, C) array."""
        return self.cells()[..., 5*self.config.B:]

    def to_json(self) -> dict:
        """The tensor in the JSON fixture format `{"s", "b", "c", "values"}`."""
        return {'s': self.config.S, 'b': self.config.B, 'c': self.config.C,
                'values': self.values.tolist()}

    @classmethod
    def from_json(cls, d: dict):
        """Create a tensor from the JSON fixture format.

        Raises
        ------
        KeyError
            If any of the `s`, `b`, `c`, or `values` keys are missing.
        ShapeError
            If the number of values does not match the configuration.
        """
        return cls(GridConfig(d['s'], d['b'], d['c']), np.asarray(d['values']))

    def __eq__(self, other):
        if not isinstance(other, DetectionTensor):
            return NotImplemented
        return self.config == other.config and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class GroundTruthObject:
    """An annotated object.

    Attributes
    ----------
    box :
        The object's box in normalised image coordinates. The centre must be inside [0, 1)².
    category :
        The category index.
    """

    box: BoundingBox
    category: int

    def __post_init__(self):
        if not (self.box.x < 1.0 and self.box.y < 1.0):
            raise DomainError(f'Object centre ({self.box.x}, {self.box.y}) is not inside '
                              'the image; centres must be in [0, 1).')
        if int(self.category) != self.category or self.category < 0:
            raise ValueError(f'Category must be a non-negative integer, not {self.category}.')


class CellPrediction(NamedTuple):
    """Decoded contents of one grid cell."""

    row: int
    col: int
    boxes: tuple[BoundingBox, ...]
    confidences: np.ndarray
    class_probs: np.ndarray


def responsible_cell(box: BoundingBox, config: GridConfig) -> tuple[int, int]:
    """The grid cell that contains the centre of a box.

    Parameters
    ----------
    box :
        The box.
    config :
        The grid configuration.

    Returns
    -------
    :
        (row, col) with row = floor(y·S) and col = floor(x·S).

    Raises
    ------
    DomainError
        If the box centre is not inside [0, 1)².
    """
    if not (0.0 <= box.x < 1.0 and 0.0 <= box.y < 1.0):
        raise DomainError(f'Box centre ({box.x}, {box.y}) is outside [0, 1)².')
    S = config.S
    return min(floor(box.y * S), S-1), min(floor(box.x * S), S-1)


def encode(objects: list[GroundTruthObject], config: GridConfig = GridConfig()) \
        -> DetectionTensor:
    """Encode ground-truth objects into a target tensor.

    Parameters
    ----------
    objects :
        The objects, at most one per grid cell.
    config :
        The grid configuration.

    Returns
    -------
    :
        A tensor where each object's cell stores the cell-relative centre offsets, the
        image-normalised width and height, a confidence of 1 in predictor slot 0, and a one-hot
        class vector. All other values are zero.

    Raises
    ------
    EncodingConflictError
        If two objects have their centres in the same cell.
    ValueError
        If an object's category is not less than `config.C`.
    """
    S, B = config.S, config.B
    cells = np.zeros((S, S, config.cell_width))
    occupied = {}

    for i, obj in enumerate(objects):
        if obj.category >= config.C:
            raise ValueError(f'Object {i} has category {obj.category} but only {config.C} '
                             'categories are configured.')
        row, col = responsible_cell(obj.box, config)
        if (row, col) in occupied:
            raise EncodingConflictError(f'Objects {occupied[(row, col)]} and {i} both fall in '
                                        f'grid cell (row={row}, col={col}).')
        occupied[(row, col)] = i

        b = obj.box
        cells[row, col, 0:5] = [b.x*S - col, b.y*S - row, b.w, b.h, 1.0]
        cells[row, col, 5*B + obj.category] = 1.0

    return DetectionTensor(config, cells)


def _decoded_box(x: float, y: float, w: float, h: float, row: int, col: int) -> BoundingBox:
    if 0.0 <= min(x, y, w, h) and max(x, y, w, h) <= 1.0:
        return BoundingBox(x, y, w, h)
    if w < 0 or h < 0:
        raise DomainError(f'Grid cell (row={row}, col={col}) predicts a negative box size '
                          f'({w}, {h}).')
    return clip_to_image(x, y, w, h)


def decode(tensor: DetectionTensor) -> list[CellPrediction]:
    """Decode a tensor into image-normalised boxes.

    Parameters
    ----------
    tensor :
        The tensor to decode.

    Returns
    -------
    :
        One entry per cell in row-major order. Box centres are x = (col + x_offset)/S and
        y = (row + y_offset)/S; widths and heights are passed through.

    Raises
    ------
    ShapeError
        If the tensor length does not match its configuration.
    DomainError
        If a predicted width or height is negative; the message names the cell.

    Notes
    -----
    A box whose centre, width, or height falls outside [0, 1] (possible for raw predictions)
    is clipped to the image as by [clip_to_image][yoloscenes.geometry.clip_to_image]. Boxes
    already inside those ranges are returned unchanged.
    """
    c = tensor.config
    if tensor.values.size != c.length:
        raise ShapeError(f'Tensor has {tensor.values.size} values, expected {c.length}.')

    boxes = tensor.box_values()
    probs = tensor.class_values()

    out = []
    for row in range(c.S):
        for col in range(c.S):
            cell_boxes = tuple(_decoded_box((col + bv[0])/c.S, (row + bv[1])/c.S, bv[2], bv[3],
                                            row, col)
                               for bv in boxes[row, col])
            out.append(CellPrediction(row, col, cell_boxes, boxes[row, col, :, 4].copy(),
                                      probs[row, col].copy()))
    return out
