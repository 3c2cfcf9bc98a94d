"""Detection ingestion and generation.

Two sources of detections feed the annotation pipeline:

* ``parse_detections`` reads the JSON Lines wire format emitted by any
  external detector (schema_version 1, one image per line).
* ``baseline_detect`` is a deterministic detector for homogeneous
  backgrounds: threshold on RGB distance to a reference color, then
  connected components. It needs no trained model and gives the
  pipeline an end-to-end path on plain PPM images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import component_stats, label_components
from .errors import ParseError
from .geometry import BBox, ImageDims, clamp_to_image

SCHEMA_VERSION = 1

_LINE_KEYS = {"schema_version", "image", "detections"}
_IMAGE_KEYS = {"id", "width", "height"}
_DETECTION_KEYS = {"bbox", "score", "label"}


@dataclass(frozen=True)
class Detection:
    """One predicted box with its confidence and label."""

    bbox: BBox
    score: float
    label: str = "object"

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass
class DetectionSet:
    """All detections reported for one image."""

    image_id: str
    dims: ImageDims
    detections: list[Detection] = field(default_factory=list)


@dataclass(frozen=True)
class BackgroundModel:
    """Parameters of the color-distance baseline detector."""

    reference_color: tuple[int, int, int]
    tolerance: float = 40.0
    min_area_px: int = 64
    connectivity: int = 8

    def __post_init__(self) -> None:
        if len(self.reference_color) != 3 or not all(
            0 <= c <= 255 for c in self.reference_color
        ):
            raise ValueError(f"reference_color must be an RGB triple 0-255: {self.reference_color}")
        if self.tolerance < 0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")
        if self.min_area_px < 1:
            raise ValueError(f"min_area_px must be >= 1, got {self.min_area_px}")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit RGB raster, pixels shaped (height, width, 3) row-major."""

    dims: ImageDims
    pixels: np.ndarray

    def __post_init__(self) -> None:
        expected = (self.dims.height, self.dims.width, 3)
        if self.pixels.shape != expected or self.pixels.dtype != np.uint8:
            raise ValueError(
                f"pixels must be uint8 with shape {expected}, "
                f"got {self.pixels.dtype} {self.pixels.shape}"
            )


def read_ppm(data: bytes) -> RasterImage:
    """Decode a P3 (ASCII) or P6 (binary) PPM with maxval 255."""
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ParseError("truncated PPM header")
        return data[start:pos]

    def int_token(name: str) -> int:
        tok = next_token()
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"bad PPM {name}: {tok!r}") from None

    magic = next_token()
    if magic not in (b"P3", b"P6"):
        raise ParseError(f"not a PPM image (magic {magic!r})")
    width = int_token("width")
    height = int_token("height")
    maxval = int_token("maxval")
    if width < 1 or height < 1:
        raise ParseError(f"bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise ParseError(f"unsupported PPM maxval {maxval} (only 255)")

    n = width * height * 3
    if magic == b"P6":
        pos += 1  # exactly one whitespace byte separates maxval from payload
        payload = data[pos : pos + n]
        if len(payload) < n:
            raise ParseError(f"truncated PPM payload: expected {n} bytes, got {len(payload)}")
        flat = np.frombuffer(payload, dtype=np.uint8)
    else:
        values = data[pos:].split()
        if len(values) < n:
            raise ParseError(f"truncated PPM payload: expected {n} samples, got {len(values)}")
        try:
            flat = np.array([int(v) for v in values[:n]], dtype=np.int64)
        except ValueError:
            raise ParseError("non-numeric sample in P3 payload") from None
        if flat.min() < 0 or flat.max() > 255:
            raise ParseError("P3 sample outside 0..255")
        flat = flat.astype(np.uint8)

    pixels = flat.reshape(height, width, 3)
    return RasterImage(ImageDims(width, height), pixels)


def write_ppm(img: RasterImage) -> bytes:
    """Encode as binary P6."""
    header = f"P6\n{img.dims.width} {img.dims.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def estimate_background(img: RasterImage, border_px: int) -> tuple[int, int, int]:
    """Per-channel median color of the image border band."""
    w, h = img.dims.width, img.dims.height
    if border_px < 1 or border_px >= min(w, h) / 2:
        raise ValueError(
            f"border_px must be in [1, {min(w, h) / 2}) for a {w}x{h} image, got {border_px}"
        )
    band = np.zeros((h, w), dtype=bool)
    band[:border_px, :] = True
    band[-border_px:, :] = True
    band[:, :border_px] = True
    band[:, -border_px:] = True
    med = np.median(img.pixels[band], axis=0)
    return (int(round(med[0])), int(round(med[1])), int(round(med[2])))


def baseline_detect(img: RasterImage, model: BackgroundModel, image_id: str = "") -> DetectionSet:
    """Detect foreground components against a homogeneous background.

    Foreground = pixels whose Euclidean RGB distance to the reference
    color exceeds the tolerance. Components smaller than min_area_px are
    dropped. Pixel (x, y) occupies [x, x+1) x [y, y+1), so a component's
    box is (min_x, min_y, max_x + 1, max_y + 1). The score is the fill
    ratio (component area / box area), a cheap confidence proxy that
    keeps downstream ranking meaningful.
    """
    px = img.pixels.astype(np.int64)
    ref = np.array(model.reference_color, dtype=np.int64)
    dist_sq = ((px - ref) ** 2).sum(axis=2)
    mask = dist_sq > model.tolerance**2

    labels, count = label_components(mask, model.connectivity)
    min_x, min_y, max_x, max_y, area = component_stats(labels, count)

    detections = []
    for i in range(count):
        if area[i] < model.min_area_px:
            continue
        bbox = BBox(float(min_x[i]), float(min_y[i]), float(max_x[i] + 1), float(max_y[i] + 1))
        detections.append(Detection(bbox, score=float(area[i]) / bbox.area))
    detections.sort(key=lambda d: (-d.score, d.bbox))
    return DetectionSet(image_id, img.dims, detections)


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ParseError(f"{where}: missing field(s) {sorted(missing)}")


def _parse_line(doc: dict, where: str) -> DetectionSet:
    _require_keys(doc, _LINE_KEYS, _LINE_KEYS, where)
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ParseError(f"{where}: unsupported schema_version {doc['schema_version']!r}")

    image = doc["image"]
    if not isinstance(image, dict):
        raise ParseError(f"{where}: 'image' must be an object")
    _require_keys(image, _IMAGE_KEYS, _IMAGE_KEYS, where)
    if not isinstance(image["id"], str):
        raise ParseError(f"{where}: image id must be a string")
    for k in ("width", "height"):
        v = image[k]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ParseError(f"{where}: image {k} must be a positive integer, got {v!r}")
    dims = ImageDims(image["width"], image["height"])

    raw = doc["detections"]
    if not isinstance(raw, list):
        raise ParseError(f"{where}: 'detections' must be an array")
    detections = []
    for j, det in enumerate(raw):
        spot = f"{where}, detection {j}"
        if not isinstance(det, dict):
            raise ParseError(f"{spot}: must be an object")
        _require_keys(det, _DETECTION_KEYS, _DETECTION_KEYS, spot)
        bbox = det["bbox"]
        if (
            not isinstance(bbox, list)
            or len(bbox) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox)
        ):
            raise ParseError(f"{spot}: bbox must be [x_min, y_min, x_max, y_max]")
        score = det["score"]
        if not isinstance(score, (int, float)) or isinstance(score, bool) or not 0 <= score <= 1:
            raise ParseError(f"{spot}: score must be a number in [0, 1], got {score!r}")
        if not isinstance(det["label"], str):
            raise ParseError(f"{spot}: label must be a string")
        try:
            box = clamp_to_image(BBox(*(float(v) for v in bbox)), dims)
        except ValueError as exc:
            raise ParseError(f"{spot}: {exc}") from None
        detections.append(Detection(box, float(score), det["label"]))
    return DetectionSet(image["id"], dims, detections)


def parse_detections(stream: str) -> list[DetectionSet]:
    """Parse the JSON Lines detection wire format (schema_version 1).

    One DetectionSet per non-blank line, in file order. Any schema
    violation raises ParseError carrying the 1-based line number;
    unknown fields are rejected.
    """
    sets = []
    for lineno, line in enumerate(stream.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"line {lineno}"
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{where}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ParseError(f"{where}: expected a JSON object")
        sets.append(_parse_line(doc, where))
    return sets
