"""Setup the public API for yoloscenes."""
from .utils import ShapeError, DomainError, SingularityError, EncodingConflictError
from .utils import BehindCameraError, OutOfFrameError, split_dict
from .geometry import BoundingBox, ScoredDetection, iou, box_iou, to_corner_form
from .geometry import from_corner_form, clip_to_image
from .gridcodec import GridConfig, DetectionTensor, GroundTruthObject, CellPrediction
from .gridcodec import VOC_CLASSES, responsible_cell, encode, decode
from .loss import LossWeights, LossBreakdown, PredictorAssignment
from .loss import assign_responsible_predictor, assign_predictors, yolo_loss, loss_gradient
from .postprocess import PostprocessConfig, class_confidence, filter_by_score, nms, detect
from .postprocess import detections_to_jsonl, detections_from_jsonl
from .scenegen import SceneConfig, ObjectSizes, SceneObject, Trial, ExperimentLayout
from .scenegen import EXPERIMENT_DISTANCES, make_object, build_layout, project, overlap_flag
from .scenegen import in_frame
from .evaldata import PhotoOutcome, Placement, TrialRecord, RateRow, SuccessRateReport
from .evaldata import CheckResult, TrafficSceneData, PROSE_CLAIMS
from .evaldata import majority_final_result, embedded_dataset, records_as_dataframe
from .evaldata import records_to_csv, success_rate, experiment_report, figure6_report
from .evaldata import figure6_dataset, same_lane_overlap_pairs, validate_dataset
from .selfcheck import SuiteResult, raster_iou, brute_force_nms, finite_difference_gradient
from .selfcheck import gradient_suite, nms_suite, iou_suite, run_selfcheck
from .config import CliConfig, load_config

__all__ = ['ShapeError', 'DomainError', 'SingularityError', 'EncodingConflictError',
           'BehindCameraError', 'OutOfFrameError', 'split_dict',
           'BoundingBox', 'ScoredDetection', 'iou', 'box_iou', 'to_corner_form',
           'from_corner_form', 'clip_to_image',
           'GridConfig', 'DetectionTensor', 'GroundTruthObject', 'CellPrediction',
           'VOC_CLASSES', 'responsible_cell', 'encode', 'decode',
           'LossWeights', 'LossBreakdown', 'PredictorAssignment',
           'assign_responsible_predictor', 'assign_predictors', 'yolo_loss', 'loss_gradient',
           'PostprocessConfig', 'class_confidence', 'filter_by_score', 'nms', 'detect',
           'detections_to_jsonl', 'detections_from_jsonl',
           'SceneConfig', 'ObjectSizes', 'SceneObject', 'Trial', 'ExperimentLayout',
           'EXPERIMENT_DISTANCES', 'make_object', 'build_layout', 'project', 'overlap_flag',
           'in_frame',
           'PhotoOutcome', 'Placement', 'TrialRecord', 'RateRow', 'SuccessRateReport',
           'CheckResult', 'TrafficSceneData', 'PROSE_CLAIMS',
           'majority_final_result', 'embedded_dataset', 'records_as_dataframe',
           'records_to_csv', 'success_rate', 'experiment_report', 'figure6_report',
           'figure6_dataset', 'same_lane_overlap_pairs', 'validate_dataset',
           'SuiteResult', 'raster_iou', 'brute_force_nms', 'finite_difference_gradient',
           'gradient_suite', 'nms_suite', 'iou_suite', 'run_selfcheck',
           'CliConfig', 'load_config']
