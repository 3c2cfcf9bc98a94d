"""Auto-annotation toolkit for single objects on homogeneous backgrounds.

Turns raw detections into finished object-detection annotations: merges
multiple boxes, adds pixel slack, attaches the operator's class name,
reads and writes VOC/YOLO/COCO files, and scores results with mAP plus
a per-image result taxonomy.
"""

from .annotations import ClassMap, ImageAnnotation, LabeledBox
from .detector import BackgroundModel, Detection, DetectionSet, RasterImage
from .errors import ParseError
from .geometry import (
    BBox,
    ImageDims,
    PostProcessConfig,
    apply_slack,
    clamp_to_image,
    contains,
    iou,
    merge_boxes,
)
from .pipeline import AnnotateConfig, SplitConfig, annotate_image, collapse_labels, split_dataset
from .evaluation import EvalConfig, EvalReport, ResultCategory, evaluate

__version__ = "0.1.0"

__all__ = [
    "AnnotateConfig",
    "BBox",
    "BackgroundModel",
    "ClassMap",
    "Detection",
    "DetectionSet",
    "EvalConfig",
    "EvalReport",
    "ImageAnnotation",
    "ImageDims",
    "LabeledBox",
    "ParseError",
    "PostProcessConfig",
    "RasterImage",
    "ResultCategory",
    "SplitConfig",
    "annotate_image",
    "apply_slack",
    "clamp_to_image",
    "collapse_labels",
    "contains",
    "evaluate",
    "iou",
    "merge_boxes",
    "split_dataset",
]
