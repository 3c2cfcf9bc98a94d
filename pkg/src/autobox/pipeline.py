"""Auto-annotation workflow and dataset splitting.

Every incoming detection is class-agnostic ("object"); the operator
supplies the one class name that ends up in the emitted annotation.
Post-processing optionally merges multiple boxes into their smallest
enclosing box and grows the result by a pixel slack before clamping.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .annotations import (
    ClassMap,
    ImageAnnotation,
    LabeledBox,
    write_coco,
    write_voc_xml,
    write_yolo,
)
from .detector import DetectionSet
from .geometry import PostProcessConfig, apply_slack, expand, merge_boxes

OBJECT_LABEL = "object"

OUTPUT_FORMATS = ("voc", "yolo", "coco")


@dataclass(frozen=True)
class AnnotateConfig:
    operator_label: str
    score_threshold: float = 0.5
    post: PostProcessConfig = field(default_factory=PostProcessConfig)
    output_format: str = "voc"

    def __post_init__(self) -> None:
        if not self.operator_label:
            raise ValueError("operator_label must be nonempty")
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ValueError(f"score_threshold must be in [0, 1], got {self.score_threshold}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass
class BatchSummary:
    annotated: int = 0
    no_detection: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"annotated": self.annotated, "no_detection": self.no_detection}


def collapse_labels(a: ImageAnnotation) -> ImageAnnotation:
    """Replace every class name with the single class-agnostic label."""
    return ImageAnnotation(
        a.image_id,
        a.dims,
        [LabeledBox(b.bbox, OBJECT_LABEL, b.difficult) for b in a.boxes],
    )


def annotate_image(dets: DetectionSet, cfg: AnnotateConfig) -> ImageAnnotation | None:
    """Turn one image's detections into a single labeled box.

    Detections below the score threshold are dropped. If none survive,
    returns None: "nothing detected" is a first-class outcome that the
    caller records instead of writing an empty file. With merging
    enabled all surviving boxes collapse into their smallest enclosing
    box; otherwise only the highest-scoring one is kept.
    """
    survivors = [d for d in dets.detections if d.score >= cfg.score_threshold]
    if not survivors:
        return None

    if cfg.post.merge_enabled:
        box = merge_boxes([d.bbox for d in survivors])
    else:
        box = min(survivors, key=lambda d: (-d.score, d.bbox)).bbox

    if cfg.post.clamp_to_image:
        box = apply_slack(box, cfg.post.slack_px, dets.dims)
    else:
        box = expand(box, cfg.post.slack_px)

    return ImageAnnotation(dets.image_id, dets.dims, [LabeledBox(box, cfg.operator_label)])


def run_batch(
    detection_sets: Iterable[DetectionSet],
    cfg: AnnotateConfig,
    out_dir: str | Path,
) -> BatchSummary:
    """Annotate a batch and write one annotation file per detected image.

    Output is a pure function of the inputs: same detections and config
    produce byte-identical files.
    """
    sets = list(detection_sets)
    seen = set()
    for s in sets:
        if s.image_id in seen:
            raise ValueError(f"duplicate image id {s.image_id!r}")
        seen.add(s.image_id)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    classes = ClassMap([cfg.operator_label])

    summary = BatchSummary()
    for s in sets:
        ann = annotate_image(s, cfg)
        if ann is None:
            summary.no_detection += 1
            continue
        if cfg.output_format == "voc":
            (out_dir / f"{ann.image_id}.xml").write_bytes(write_voc_xml(ann))
        elif cfg.output_format == "yolo":
            (out_dir / f"{ann.image_id}.txt").write_text(write_yolo(ann, classes))
        else:
            (out_dir / f"{ann.image_id}.json").write_bytes(write_coco([ann], classes))
        summary.annotated += 1

    if cfg.output_format == "yolo" and summary.annotated:
        (out_dir / "classes.txt").write_text(classes.to_text())
    return summary


def split_dataset(ids: Sequence[str], cfg: SplitConfig) -> tuple[list[str], list[str]]:
    """Deterministic train/val partition of unique image ids.

    Ids are sorted before the seeded shuffle, so the split depends only
    on the id set and the seed. Train gets floor(train_fraction * n).
    """
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise ValueError("image ids must be unique")
    n = len(ids)
    if n < 2:
        raise ValueError(f"need at least 2 ids to split, got {n}")

    # round before floor: 0.7 * 10 is 6.999... in binary floating point
    n_train = math.floor(round(cfg.train_fraction * n, 9))
    if n_train < 1 or n_train >= n:
        raise ValueError(
            f"train_fraction {cfg.train_fraction} leaves an empty split for {n} ids"
        )

    order = sorted(ids)
    random.Random(cfg.seed).shuffle(order)
    return order[:n_train], order[n_train:]


def write_split(train: Sequence[str], val: Sequence[str], out_dir: str | Path) -> None:
    """Write train.txt and val.txt, one image id per line."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "train.txt").write_text("".join(f"{i}\n" for i in train))
    (out_dir / "val.txt").write_text("".join(f"{i}\n" for i in val))
