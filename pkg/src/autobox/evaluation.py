"""Detection scoring: greedy IoU matching, AP/mAP, per-image result taxonomy.

AP uses all-point interpolation (area under the precision envelope),
computed from a global ranking of predictions by descending score.
The per-image taxonomy sorts each image into exactly one primary
category and additionally tallies stray boxes that hit neither the
object nor the image: background boxes, or boxes on optional
"distractor" regions (e.g. the hand holding the object).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .annotations import ImageAnnotation, LabeledBox
from .detector import Detection, DetectionSet
from .geometry import BBox, contains, iou

DISTRACTOR_KINDS = ("head_face", "hand", "body")


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    oversize_factor: float = 2.0
    hit_iou: float = 0.1
    score_threshold: float = 0.0  # operating point for TP/FP/FN counting

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")
        if self.oversize_factor <= 1.0:
            raise ValueError(f"oversize_factor must be > 1, got {self.oversize_factor}")
        if not 0.0 < self.hit_iou < self.iou_threshold:
            raise ValueError(
                f"hit_iou must be in (0, iou_threshold), got {self.hit_iou} "
                f"vs threshold {self.iou_threshold}"
            )
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ValueError(f"score_threshold must be in [0, 1], got {self.score_threshold}")


@dataclass
class EvalReport:
    per_class_ap: dict[str, float]
    map: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int

    def as_dict(self) -> dict:
        return {
            "map": self.map,
            "per_class_ap": dict(self.per_class_ap),
            "precision": self.precision,
            "recall": self.recall,
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn},
        }


class ResultCategory(Enum):
    """Primary per-image outcome; every image lands in exactly one."""

    CORRECT = "correct"
    NOT_DETECTED = "not_detected"
    MULTIPLE_TIMES = "multiple_times"
    PARTLY_SINGLE_BOX = "partly"
    CORRECT_PLUS_OTHER = "correct_plus_other"


@dataclass
class CategorizedImage:
    category: ResultCategory
    background_boxes: int = 0
    distractor_boxes: Counter = field(default_factory=Counter)


@dataclass
class CategoryReport:
    counts: dict[ResultCategory, int]
    total: int
    background_boxes: int
    distractor_boxes: Counter

    def as_dict(self) -> dict:
        distractors = {k: 0 for k in DISTRACTOR_KINDS}
        distractors.update(sorted(self.distractor_boxes.items()))
        out: dict = {c.value: self.counts.get(c, 0) for c in ResultCategory}
        out["background_boxes"] = self.background_boxes
        out["distractor_boxes"] = distractors
        return out


def _iou_or_zero(a: BBox, b: BBox) -> float:
    if a.area == 0.0 and b.area == 0.0:
        return 0.0
    return iou(a, b)


def match_detections(
    preds: list[Detection],
    gt: list[LabeledBox],
    cfg: EvalConfig,
) -> list[tuple[Detection, int | None]]:
    """Greedily match predictions to ground truth within one image.

    Predictions are taken in descending score order (ties broken by box
    coordinates); each gets the unmatched same-class GT with the highest
    IoU if that IoU reaches the threshold, otherwise stays unmatched.
    Each GT box is matched at most once. Returns (prediction, GT index
    or None) in match order.
    """
    ordered = sorted(preds, key=lambda d: (-d.score, d.bbox))
    taken = [False] * len(gt)
    result: list[tuple[Detection, int | None]] = []
    for det in ordered:
        best_i = None
        best_iou = 0.0
        for i, g in enumerate(gt):
            if taken[i] or g.class_name != det.label:
                continue
            v = _iou_or_zero(det.bbox, g.bbox)
            if v > best_iou:
                best_iou = v
                best_i = i
        if best_i is not None and best_iou >= cfg.iou_threshold:
            taken[best_i] = True
            result.append((det, best_i))
        else:
            result.append((det, None))
    return result


def average_precision(matches: list[tuple[Detection, int | None]], n_gt: int) -> float:
    """All-point-interpolation AP from pooled per-image match results.

    Ranks all predictions by descending score, accumulates precision and
    recall, and integrates the precision envelope (max precision at any
    recall >= r).
    """
    if n_gt < 1:
        raise ValueError(f"average_precision needs n_gt >= 1, got {n_gt}")
    if not matches:
        return 0.0

    ordered = sorted(matches, key=lambda m: (-m[0].score, m[0].bbox))
    tp = np.array([m[1] is not None for m in ordered], dtype=np.float64)
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(1.0 - tp)
    recall = cum_tp / n_gt
    precision = cum_tp / (cum_tp + cum_fp)

    mrec = np.concatenate(([0.0], recall))
    mpre = np.concatenate(([0.0], precision))
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]  # precision envelope
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def _check_same_ids(pred_sets: list[DetectionSet], gt: list[ImageAnnotation]) -> None:
    pred_ids = {s.image_id for s in pred_sets}
    gt_ids = {a.image_id for a in gt}
    if len(pred_ids) != len(pred_sets):
        raise ValueError("duplicate image ids among predictions")
    if len(gt_ids) != len(gt):
        raise ValueError("duplicate image ids among ground truth")
    missing_pred = sorted(gt_ids - pred_ids)
    missing_gt = sorted(pred_ids - gt_ids)
    if missing_pred or missing_gt:
        parts = []
        if missing_pred:
            parts.append(f"missing from predictions: {missing_pred}")
        if missing_gt:
            parts.append(f"missing from ground truth: {missing_gt}")
        raise ValueError("image id mismatch: " + "; ".join(parts))


def evaluate(
    pred_sets: list[DetectionSet],
    gt: list[ImageAnnotation],
    cfg: EvalConfig | None = None,
) -> EvalReport:
    """Score predictions against ground truth at one IoU threshold.

    AP per class uses every prediction regardless of score (ranking
    metric); the TP/FP/FN counts and precision/recall are taken at
    cfg.score_threshold.
    """
    cfg = cfg or EvalConfig()
    _check_same_ids(pred_sets, gt)
    gt_by_id = {a.image_id: a for a in gt}
    image_ids = sorted(gt_by_id)
    preds_by_id = {s.image_id: s for s in pred_sets}

    classes = sorted({b.class_name for a in gt for b in a.boxes})
    n_gt_total = sum(len(a.boxes) for a in gt)
    if n_gt_total == 0:
        raise ValueError("ground truth contains no boxes")

    per_class_ap = {}
    for cls in classes:
        matches = []
        n_gt_cls = 0
        for img in image_ids:
            cls_gt = [b for b in gt_by_id[img].boxes if b.class_name == cls]
            cls_preds = [d for d in preds_by_id[img].detections if d.label == cls]
            n_gt_cls += len(cls_gt)
            matches.extend(match_detections(cls_preds, cls_gt, cfg))
        per_class_ap[cls] = average_precision(matches, n_gt_cls) if n_gt_cls else 0.0

    # operating-point counts: rematch with only the predictions in play
    tp = 0
    fp = 0
    for img in image_ids:
        ann = gt_by_id[img]
        dets = [d for d in preds_by_id[img].detections if d.score >= cfg.score_threshold]
        labels = {b.class_name for b in ann.boxes} | {d.label for d in dets}
        for cls in sorted(labels):
            cls_gt = [b for b in ann.boxes if b.class_name == cls]
            cls_preds = [d for d in dets if d.label == cls]
            for _, matched in match_detections(cls_preds, cls_gt, cfg):
                if matched is None:
                    fp += 1
                else:
                    tp += 1
    fn = n_gt_total - tp

    return EvalReport(
        per_class_ap=per_class_ap,
        map=float(np.mean(list(per_class_ap.values()))),
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / n_gt_total,
        tp=tp,
        fp=fp,
        fn=fn,
    )


def categorize_image(
    preds: list[Detection],
    gt_object: LabeledBox,
    distractors: list[LabeledBox] | None = None,
    cfg: EvalConfig | None = None,
) -> CategorizedImage:
    """Sort one single-object image into the seven-way result taxonomy.

    Decision ladder over predictions that hit the object (IoU >= hit_iou):

    1. no hit: not detected
    2. two or more hits: detected multiple times
    3. a single hit that misses part of the object at good IoU: partly
    4. a containing hit at >= oversize_factor times the object area:
       correct plus other parts
    5. a hit at IoU >= iou_threshold: correct
    6. anything else: partly

    Non-hit predictions count as background boxes unless they overlap a
    distractor region, and a correct image with any such stray box is
    downgraded to "correct plus other parts".
    """
    cfg = cfg or EvalConfig()
    distractors = distractors or []
    gt_box = gt_object.bbox
    if gt_box.area <= 0:
        raise ValueError("ground-truth object box must have positive area")

    hits = []
    background = 0
    distractor_hits: Counter = Counter()
    for det in preds:
        if _iou_or_zero(det.bbox, gt_box) >= cfg.hit_iou:
            hits.append(det)
            continue
        kind = None
        for d in distractors:
            if _iou_or_zero(det.bbox, d.bbox) >= cfg.hit_iou:
                kind = d.class_name
                break
        if kind is None:
            background += 1
        else:
            distractor_hits[kind] += 1

    if not hits:
        category = ResultCategory.NOT_DETECTED
    elif len(hits) >= 2:
        category = ResultCategory.MULTIPLE_TIMES
    else:
        h = hits[0].bbox
        h_iou = iou(h, gt_box)
        if not contains(h, gt_box) and h_iou >= cfg.iou_threshold:
            category = ResultCategory.PARTLY_SINGLE_BOX
        elif contains(h, gt_box) and h.area >= cfg.oversize_factor * gt_box.area:
            category = ResultCategory.CORRECT_PLUS_OTHER
        elif h_iou >= cfg.iou_threshold:
            category = ResultCategory.CORRECT
        else:
            category = ResultCategory.PARTLY_SINGLE_BOX

    if category is ResultCategory.CORRECT and (background or distractor_hits):
        category = ResultCategory.CORRECT_PLUS_OTHER

    return CategorizedImage(category, background, distractor_hits)


def aggregate_categories(items: list[CategorizedImage]) -> CategoryReport:
    """Exact counts over per-image categorizations."""
    counts: dict[ResultCategory, int] = {c: 0 for c in ResultCategory}
    background = 0
    distractors: Counter = Counter()
    for item in items:
        counts[item.category] += 1
        background += item.background_boxes
        distractors.update(item.distractor_boxes)
    return CategoryReport(counts, len(items), background, distractors)


def categorize_dataset(
    pred_sets: list[DetectionSet],
    gt: list[ImageAnnotation],
    cfg: EvalConfig | None = None,
    distractor_classes: tuple[str, ...] = DISTRACTOR_KINDS,
) -> CategoryReport:
    """Categorize every image of a single-object dataset.

    Ground-truth boxes whose class is in distractor_classes become the
    image's distractor regions; exactly one object box must remain.
    Predictions below cfg.score_threshold are ignored.
    """
    cfg = cfg or EvalConfig()
    _check_same_ids(pred_sets, gt)
    preds_by_id = {s.image_id: s for s in pred_sets}

    items = []
    for ann in sorted(gt, key=lambda a: a.image_id):
        distractors = [b for b in ann.boxes if b.class_name in distractor_classes]
        objects = [b for b in ann.boxes if b.class_name not in distractor_classes]
        if len(objects) != 1:
            raise ValueError(
                f"image {ann.image_id!r} has {len(objects)} object boxes; "
                "categorization needs exactly one"
            )
        dets = [d for d in preds_by_id[ann.image_id].detections if d.score >= cfg.score_threshold]
        items.append(categorize_image(dets, objects[0], distractors, cfg))
    return aggregate_categories(items)
