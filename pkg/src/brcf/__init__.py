"""Correlation-filter ship tracking with multi-feature fusion, keypoint
scale pre-estimation and bounding-box regression."""

from .boxes import BBox, center_distance, iou
from .cf import (
    FilterModel,
    detect,
    gaussian_label,
    kernel_correlation,
    response_peak,
    train_filter,
    update_model,
)
from .fusion import FusionWeights, fuse_responses, kl_divergence, update_weights
from .media import Patch, Sequence, extract_patch, integral_image, load_sequence
from .metrics import (
    EvalRecord,
    Zone,
    load_zones,
    precision_curve,
    success_curve,
    zone_alarm,
    zone_distance,
)
from .regression import RegressorWeights, load_regressor, save_regressor, train_regressor
from .synth import MotionSpec, ground_truth, synth_sequence
from .tracker import FrameResult, Tracker, TrackerConfig, TrackingLost, track_sequence

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "EvalRecord",
    "FilterModel",
    "FrameResult",
    "FusionWeights",
    "MotionSpec",
    "Patch",
    "RegressorWeights",
    "Sequence",
    "Tracker",
    "TrackerConfig",
    "TrackingLost",
    "Zone",
    "center_distance",
    "detect",
    "extract_patch",
    "fuse_responses",
    "gaussian_label",
    "ground_truth",
    "integral_image",
    "iou",
    "kernel_correlation",
    "kl_divergence",
    "load_regressor",
    "load_sequence",
    "load_zones",
    "precision_curve",
    "response_peak",
    "save_regressor",
    "success_curve",
    "synth_sequence",
    "track_sequence",
    "train_filter",
    "train_regressor",
    "update_model",
    "update_weights",
    "zone_alarm",
    "zone_distance",
]
