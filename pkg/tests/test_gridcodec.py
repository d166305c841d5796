"""Tests of the grid-cell tensor encoding and decoding."""
import json
import pytest
import numpy as np
from yoloscenes import (BoundingBox, GridConfig, DetectionTensor, GroundTruthObject,
                        responsible_cell, encode, decode, VOC_CLASSES, DomainError, ShapeError,
                        EncodingConflictError)
from yoloscenes.selfcheck import random_target


@pytest.fixture
def rng():
    """A seeded random number generator."""
    return np.random.default_rng(42)


def random_objects(rng, config):
    """Conflict-free objects, one in each of a random subset of cells."""
    S = config.S
    cells = [(r, c) for r in range(S) for c in range(S) if rng.random() < 0.4]
    return [GroundTruthObject(BoundingBox((c + rng.uniform(0, 0.999))/S,
                                          (r + rng.uniform(0, 0.999))/S,
                                          *rng.uniform(0, 1, 2)), int(rng.integers(config.C)))
            for r, c in cells]


def test_shape():
    c = GridConfig()
    assert c.cell_width == 30
    assert c.length == 1470
    assert len(VOC_CLASSES) == c.C
    assert GridConfig(4, 1, 3).length == 4*4*8


def test_responsible_cell():
    c = GridConfig()
    assert responsible_cell(BoundingBox(0.5, 0.5, 0.1, 0.1), c) == (3, 3)
    assert responsible_cell(BoundingBox(0.0, 0.0, 0.1, 0.1), c) == (0, 0)
    assert responsible_cell(BoundingBox(0.99, 0.01, 0.1, 0.1), c) == (0, 6)
    with pytest.raises(DomainError):
        responsible_cell(BoundingBox(1.0, 0.5, 0.1, 0.1), c)


def test_encode_examples():
    t = encode([], GridConfig())
    assert t.values.size == 1470
    assert not np.any(t.values)

    t = encode([GroundTruthObject(BoundingBox(0.5, 0.5, 0.2, 0.4), 0)], GridConfig(1, 1, 1))
    assert np.array_equal(t.values, [0.5, 0.5, 0.2, 0.4, 1.0, 1.0])


def test_encode_offsets():
    # x·S = 4 lands on the boundary of column 4
    t = encode([GroundTruthObject(BoundingBox(0.5 + 1/14, 0.5, 0.1, 0.1), 3)])
    cells = t.box_values()
    occupied = np.argwhere(cells[..., 0, 4] == 1.0)
    assert len(occupied) == 1
    row, col = occupied[0]
    assert row == 3
    assert col + cells[row, col, 0, 0] == pytest.approx(4.0)

    t = encode([GroundTruthObject(BoundingBox(0.625, 0.125, 0.1, 0.1), 0)], GridConfig(4, 2, 2))
    assert t.box_values()[0, 2, 0, 0] == 0.5
    assert t.box_values()[0, 2, 0, 1] == 0.5
    assert np.array_equal(t.class_values()[0, 2], [1.0, 0.0])
    assert not np.any(t.box_values()[0, 2, 1])


def test_encode_conflict():
    objects = [GroundTruthObject(BoundingBox(0.5, 0.5, 0.1, 0.1), 0),
               GroundTruthObject(BoundingBox(0.52, 0.48, 0.2, 0.2), 1)]
    with pytest.raises(EncodingConflictError, match='row=3, col=3'):
        encode(objects)


def test_encode_category():
    with pytest.raises(ValueError):
        encode([GroundTruthObject(BoundingBox(0.5, 0.5, 0.1, 0.1), 3)], GridConfig(2, 1, 3))


def test_decode_examples():
    cells = decode(DetectionTensor.zeros(GridConfig(2, 2, 1)))
    assert [(c.row, c.col) for c in cells] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for c in cells:
        assert all(b.w == 0 and b.h == 0 for b in c.boxes)
        assert not np.any(c.confidences)

    cell = decode(DetectionTensor(GridConfig(1, 1, 1), [0.5, 0.5, 0.2, 0.4, 1.0, 1.0]))[0]
    assert cell.boxes[0] == BoundingBox(0.5, 0.5, 0.2, 0.4)
    assert cell.confidences[0] == 1.0


def test_decode_clips_raw_predictions():
    # width larger than the image
    cell = decode(DetectionTensor(GridConfig(1, 1, 1), [0.5, 0.5, 1.2, 0.4, 0.01, 0.5]))[0]
    assert np.allclose(cell.boxes[0].as_array(), [0.5, 0.5, 1.0, 0.4])

    # offset that moves the centre out of the image
    values = np.zeros(GridConfig(2, 1, 1).length)
    values[6:10] = [1.5, 0.5, 0.2, 0.2]
    box = decode(DetectionTensor(GridConfig(2, 1, 1), values))[1].boxes[0]
    assert box.x == 1.0 and box.w == 0.0

    with pytest.raises(DomainError, match=r'row=0, col=0'):
        decode(DetectionTensor(GridConfig(1, 1, 1), [0.5, 0.5, -0.1, 0.4, 1.0, 1.0]))


def test_round_trip(rng):
    for _ in range(100):
        config = GridConfig(int(rng.integers(1, 8)), int(rng.integers(1, 3)),
                            int(rng.integers(1, 5)))
        objects = random_objects(rng, config)
        decoded = decode(encode(objects, config))
        for obj in objects:
            row, col = responsible_cell(obj.box, config)
            cell = decoded[row*config.S + col]
            assert (cell.row, cell.col) == (row, col)
            assert np.allclose(cell.boxes[0].as_array(), obj.box.as_array(), rtol=0, atol=1e-12)
            assert responsible_cell(cell.boxes[0], config) == (row, col)
            assert cell.confidences[0] == 1.0
            assert np.array_equal(cell.class_probs, np.eye(config.C)[obj.category])
        offsets = encode(objects, config).box_values()[..., 0:2]
        assert np.all((offsets >= 0) & (offsets < 1))


def test_tensor_is_read_only():
    t = DetectionTensor.zeros(GridConfig(1, 1, 1))
    with pytest.raises(ValueError):
        t.values[0] = 1.0


def test_json(rng):
    t = random_target(rng, GridConfig(3, 2, 2))
    d = json.loads(json.dumps(t.to_json()))
    assert set(d) == {'s', 'b', 'c', 'values'}
    assert DetectionTensor.from_json(d) == t
    d['values'] = d['values'][:-1]
    with pytest.raises(ShapeError):
        DetectionTensor.from_json(d)
