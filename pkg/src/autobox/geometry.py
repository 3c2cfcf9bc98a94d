"""Axis-aligned bounding-box arithmetic in continuous pixel coordinates.

Boxes use edge coordinates: a box spans the real interval
[x_min, x_max] x [y_min, y_max], origin top-left, y growing downward.
Area is width * height with no "+1" pixel counting; 1-based integer
conventions are handled at the annotation-format boundary, not here.

All functions are pure and safe to call from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned box. Ordering is lexicographic on the four coordinates."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(
                f"inverted box: ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


@dataclass(frozen=True)
class ImageDims:
    """Image size in whole pixels."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if not isinstance(self.width, int) or not isinstance(self.height, int):
            raise ValueError("image dimensions must be integers")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be positive: {self.width}x{self.height}")


@dataclass(frozen=True)
class PostProcessConfig:
    """Box post-processing knobs: merge multiple boxes, add pixel slack, clamp."""

    merge_enabled: bool = True
    slack_px: float = 0.0
    clamp_to_image: bool = True

    def __post_init__(self) -> None:
        if self.slack_px < 0:
            raise ValueError(f"slack_px must be >= 0, got {self.slack_px}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Zero-area intersections yield 0.0 rather than NaN; two zero-area
    boxes have no defined IoU and raise.
    """
    if a.area == 0.0 and b.area == 0.0:
        raise ValueError("iou is undefined for two zero-area boxes")
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def contains(outer: BBox, inner: BBox) -> bool:
    """True iff inner lies entirely within outer (edges may touch)."""
    return (
        outer.x_min <= inner.x_min
        and outer.y_min <= inner.y_min
        and outer.x_max >= inner.x_max
        and outer.y_max >= inner.y_max
    )


def merge_boxes(boxes: list[BBox]) -> BBox:
    """Smallest box containing every input box.

    An empty list is an error: "nothing detected" must stay a distinct
    outcome upstream instead of silently becoming a box.
    """
    if not boxes:
        raise ValueError("cannot merge an empty list of boxes")
    return BBox(
        min(b.x_min for b in boxes),
        min(b.y_min for b in boxes),
        max(b.x_max for b in boxes),
        max(b.y_max for b in boxes),
    )


def expand(b: BBox, margin_px: float) -> BBox:
    """Move every side of the box outward by margin_px (no clamping)."""
    if margin_px < 0:
        raise ValueError(f"margin_px must be >= 0, got {margin_px}")
    return BBox(b.x_min - margin_px, b.y_min - margin_px, b.x_max + margin_px, b.y_max + margin_px)


def clamp_to_image(b: BBox, dims: ImageDims) -> BBox:
    """Clip box coordinates to [0, width] x [0, height].

    A box with no positive-length overlap with the image on either axis
    is treated as corrupt and raises.
    """
    if b.x_min >= dims.width or b.x_max <= 0 or b.y_min >= dims.height or b.y_max <= 0:
        raise ValueError(
            f"box {b.as_tuple()} lies entirely outside a {dims.width}x{dims.height} image"
        )
    return BBox(
        min(max(b.x_min, 0.0), float(dims.width)),
        min(max(b.y_min, 0.0), float(dims.height)),
        min(max(b.x_max, 0.0), float(dims.width)),
        min(max(b.y_max, 0.0), float(dims.height)),
    )


def apply_slack(b: BBox, slack_px: float, dims: ImageDims) -> BBox:
    """Grow the box by slack_px on each side, then clamp to the image."""
    return clamp_to_image(expand(b, slack_px), dims)
