"""Functions to test that the configuration types check their input parameters."""
import pytest
import numpy as np
from yoloscenes import (BoundingBox, ScoredDetection, GridConfig, DetectionTensor,
                        GroundTruthObject, LossWeights, PostprocessConfig, SceneConfig,
                        ObjectSizes, SceneObject, Placement, PhotoOutcome, TrialRecord,
                        CliConfig, split_dict, ShapeError, DomainError)
from yoloscenes.utils import present_and_in, present_and_positive, present_and_unit


@pytest.fixture
def params():
    """Some parameters to validate."""
    return {'a': 1.0, 'b': [0.5, 2.0], 'c': 0.0, 'lane': 'Left'}


def test_split_dict():
    rest, picked = split_dict({'a': 1, 'b': 2, 'c': 3}, ['b', 'z'])
    assert rest == {'a': 1, 'c': 3}
    assert picked == {'b': 2}


def test_present_and_positive(params):
    present_and_positive(params, ['a', 'b'])
    present_and_positive(params, ['c'], allow_zero=True)
    with pytest.raises(ValueError):
        present_and_positive(params, ['c'])
    with pytest.raises(KeyError):
        present_and_positive(params, ['missing'])
    with pytest.raises(ValueError):
        present_and_positive({'a': np.nan}, ['a'])
    with pytest.raises(ValueError):
        present_and_positive({'a': None}, ['a'])


def test_present_and_in(params):
    present_and_in(params, ['lane'], ['Left', 'Middle'])
    with pytest.raises(ValueError):
        present_and_in(params, ['lane'], ['Right'])
    with pytest.raises(KeyError):
        present_and_in(params, ['missing'], ['Right'])


def test_present_and_unit(params):
    present_and_unit(params, ['a', 'c'])
    with pytest.raises(ValueError):
        present_and_unit(params, ['b'])


# Every configuration type rejects bad values at construction.
def test_bounding_box():
    BoundingBox(0, 0, 1, 1)
    for bad in [(-0.1, 0.5, 0.1, 0.1), (0.5, 1.1, 0.1, 0.1), (0.5, 0.5, -0.1, 0.1),
                (0.5, 0.5, 0.1, 1.5), (np.nan, 0.5, 0.1, 0.1)]:
        with pytest.raises(ValueError):
            BoundingBox(*bad)


def test_scored_detection():
    box = BoundingBox(0.5, 0.5, 0.2, 0.2)
    with pytest.raises(ValueError):
        ScoredDetection(box, 0, 1.2)
    with pytest.raises(ValueError):
        ScoredDetection(box, -1, 0.5)
    with pytest.raises(ValueError):
        ScoredDetection(box, 0.5, 0.5)


def test_grid_config():
    assert GridConfig().length == 1470
    with pytest.raises(ValueError):
        GridConfig(S=0)
    with pytest.raises(ValueError):
        GridConfig(B=1.5)


def test_detection_tensor_length():
    with pytest.raises(ShapeError):
        DetectionTensor(GridConfig(), np.zeros(1469))
    # ShapeError is a ValueError
    with pytest.raises(ValueError):
        DetectionTensor(GridConfig(1, 1, 1), np.zeros(7))


def test_ground_truth_object():
    with pytest.raises(DomainError):
        GroundTruthObject(BoundingBox(1.0, 0.5, 0.1, 0.1), 0)
    with pytest.raises(ValueError):
        GroundTruthObject(BoundingBox(0.5, 0.5, 0.1, 0.1), -2)


def test_loss_weights():
    with pytest.raises(ValueError):
        LossWeights(lambda_coord=-1)
    with pytest.warns(UserWarning):
        LossWeights(lambda_noobj=0)


def test_postprocess_config():
    with pytest.raises(ValueError):
        PostprocessConfig(score_threshold=1.5)
    with pytest.raises(ValueError):
        PostprocessConfig(nms_iou_threshold=-0.1)


def test_scene_config():
    assert SceneConfig(40).focal_scale == pytest.approx(2.4)
    with pytest.raises(ValueError):
        SceneConfig(0)
    with pytest.raises(ValueError):
        SceneConfig(40, image_aspect=-1)
    with pytest.raises(ValueError):
        SceneConfig(40, camera_height_ft=-1)


def test_scene_objects():
    with pytest.raises(ValueError):
        ObjectSizes(person_height_ft=0)
    with pytest.raises(ValueError):
        SceneObject('bicycle', 'Left', 0, 1, 1)
    with pytest.raises(ValueError):
        SceneObject('car', 'Centre', 0, 1, 1)
    with pytest.raises(ValueError):
        SceneObject('car', 'Left', 5, 1, 1)


def test_records():
    with pytest.raises(ValueError):
        Placement('Left', 30)
    with pytest.raises(ValueError):
        PhotoOutcome(True, detected_person=True, detected_car=False)
    with pytest.raises(ValueError):
        TrialRecord(1, 10, None, Placement('Left', 0), (PhotoOutcome(True),), measured=False)
    with pytest.raises(ValueError):
        TrialRecord(3, 40, Placement('Left', 0), Placement('Left', 0),
                    (PhotoOutcome(True), PhotoOutcome(True)), pre_aggregated=True)


def test_cli_config():
    with pytest.raises(ValueError):
        CliConfig(output_format='xml')
    with pytest.raises(ValueError):
        CliConfig(scene={'lane_spacing_ft': 0})
