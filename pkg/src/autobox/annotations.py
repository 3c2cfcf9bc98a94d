"""Annotation file formats: Pascal-VOC XML, YOLO txt, minimal COCO JSON.

The internal representation keeps continuous edge coordinates; each
format boundary owns its own convention:

* VOC bndbox integers are read as 1-based inclusive pixel indices and
  converted via (xmin-1, ymin-1, xmax, ymax), so a bndbox (1,1,10,10)
  is the interval [0,10] x [0,10].
* YOLO lines hold class index plus normalized center/size, serialized
  at 6 decimal places (round-trip error stays under a pixel for any
  realistic image size).
* COCO is the detection subset only: images, annotations with
  [x, y, w, h] boxes, categories.

Out-of-bounds boxes are clamped with a warning; boxes entirely outside
the image are rejected. Real-world ground truth is too noisy for hard
failure on every overhang.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError
from .geometry import BBox, ImageDims, clamp_to_image

log = logging.getLogger(__name__)

FORMATS = ("voc", "yolo", "coco")


@dataclass(frozen=True)
class LabeledBox:
    bbox: BBox
    class_name: str
    difficult: bool = False

    def __post_init__(self) -> None:
        if not self.class_name:
            raise ValueError("class_name must be nonempty")
        if "\n" in self.class_name:
            raise ValueError("class_name must not contain newlines")


@dataclass
class ImageAnnotation:
    """Ground-truth or emitted boxes for one image, keyed by filename stem."""

    image_id: str
    dims: ImageDims
    boxes: list[LabeledBox] = field(default_factory=list)

    def __post_init__(self) -> None:
        for b in self.boxes:
            bb = b.bbox
            if bb.x_min < 0 or bb.y_min < 0 or bb.x_max > self.dims.width or bb.y_max > self.dims.height:
                raise ValueError(
                    f"box {bb.as_tuple()} outside {self.dims.width}x{self.dims.height} "
                    f"image {self.image_id!r}"
                )

    @property
    def class_names(self) -> set[str]:
        return {b.class_name for b in self.boxes}


class ClassMap:
    """Ordered class names with a bidirectional name <-> index mapping."""

    def __init__(self, names: Sequence[str]):
        names = list(names)
        if not names:
            raise ValueError("ClassMap needs at least one class name")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate class names: {names}")
        if any(not n or "\n" in n for n in names):
            raise ValueError("class names must be nonempty single-line strings")
        self.names: tuple[str, ...] = tuple(names)
        self._index = {n: i for i, n in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown class {name!r} (have {list(self.names)})") from None

    def name(self, index: int) -> str:
        if not 0 <= index < len(self.names):
            raise ValueError(f"class index {index} out of range 0..{len(self.names) - 1}")
        return self.names[index]

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ClassMap) and self.names == other.names

    def __repr__(self) -> str:
        return f"ClassMap({list(self.names)})"

    @classmethod
    def from_text(cls, text: str) -> "ClassMap":
        return cls([line.strip() for line in text.splitlines() if line.strip()])

    def to_text(self) -> str:
        return "".join(f"{n}\n" for n in self.names)


def _clamp_parsed(bbox: BBox, dims: ImageDims, where: str) -> BBox:
    try:
        clamped = clamp_to_image(bbox, dims)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None
    if clamped != bbox:
        log.warning("%s: box %s clamped to image bounds", where, bbox.as_tuple())
    return clamped


# ---------------------------------------------------------------------------
# Pascal-VOC XML


def _voc_find(parent: ET.Element, tag: str, where: str) -> ET.Element:
    node = parent.find(tag)
    if node is None or node.text is None:
        raise ParseError(f"{where}: missing <{tag}>")
    return node


def _voc_number(parent: ET.Element, tag: str, where: str) -> float:
    text = _voc_find(parent, tag, where).text.strip()
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{where}: <{tag}> is not a number: {text!r}") from None


def parse_voc_xml(document: bytes) -> ImageAnnotation:
    """Parse one VOC XML annotation document."""
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from None

    filename = _voc_find(root, "filename", "annotation").text.strip()
    image_id = Path(filename).stem
    where = f"voc {filename!r}"

    size = root.find("size")
    if size is None:
        raise ParseError(f"{where}: missing <size>")
    dims = ImageDims(int(_voc_number(size, "width", where)), int(_voc_number(size, "height", where)))

    boxes = []
    for obj in root.iter("object"):
        name = _voc_find(obj, "name", where).text.strip()
        difficult = (obj.findtext("difficult") or "0").strip() not in ("", "0")
        bndbox = obj.find("bndbox")
        if bndbox is None:
            raise ParseError(f"{where}: object {name!r} missing <bndbox>")
        xmin = _voc_number(bndbox, "xmin", where)
        ymin = _voc_number(bndbox, "ymin", where)
        xmax = _voc_number(bndbox, "xmax", where)
        ymax = _voc_number(bndbox, "ymax", where)
        if xmax <= xmin or ymax <= ymin:
            raise ParseError(
                f"{where}: degenerate bndbox ({xmin}, {ymin}, {xmax}, {ymax}) for {name!r}"
            )
        bbox = BBox(xmin - 1, ymin - 1, xmax, ymax)  # 1-based inclusive -> edge coords
        boxes.append(LabeledBox(_clamp_parsed(bbox, dims, where), name, difficult))

    return ImageAnnotation(image_id, dims, boxes)


def write_voc_xml(a: ImageAnnotation) -> bytes:
    """Serialize to VOC XML; inverse of parse_voc_xml on integral coordinates."""
    root = ET.Element("annotation")
    ET.SubElement(root, "filename").text = f"{a.image_id}.jpg"
    size = ET.SubElement(root, "size")
    ET.SubElement(size, "width").text = str(a.dims.width)
    ET.SubElement(size, "height").text = str(a.dims.height)
    ET.SubElement(size, "depth").text = "3"
    for b in a.boxes:
        obj = ET.SubElement(root, "object")
        ET.SubElement(obj, "name").text = b.class_name
        ET.SubElement(obj, "difficult").text = str(int(b.difficult))
        bnd = ET.SubElement(obj, "bndbox")
        ET.SubElement(bnd, "xmin").text = str(int(round(b.bbox.x_min)) + 1)
        ET.SubElement(bnd, "ymin").text = str(int(round(b.bbox.y_min)) + 1)
        ET.SubElement(bnd, "xmax").text = str(int(round(b.bbox.x_max)))
        ET.SubElement(bnd, "ymax").text = str(int(round(b.bbox.y_max)))
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="utf-8") + b"\n"


# ---------------------------------------------------------------------------
# YOLO txt


def parse_yolo(lines: str, dims: ImageDims, classes: ClassMap, image_id: str = "") -> ImageAnnotation:
    """Parse YOLO txt content: one "idx cx cy w h" line per box, normalized."""
    boxes = []
    for lineno, line in enumerate(lines.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"yolo line {lineno}"
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(f"{where}: expected 5 fields, got {len(parts)}")
        try:
            idx = int(parts[0])
        except ValueError:
            raise ParseError(f"{where}: class index is not an integer: {parts[0]!r}") from None
        try:
            cx, cy, w, h = (float(p) for p in parts[1:])
        except ValueError:
            raise ParseError(f"{where}: non-numeric coordinate") from None
        for value in (cx, cy, w, h):
            if not 0.0 <= value <= 1.0:
                raise ParseError(f"{where}: normalized value {value} outside [0, 1]")
        try:
            name = classes.name(idx)
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from None
        bbox = BBox(
            (cx - w / 2) * dims.width,
            (cy - h / 2) * dims.height,
            (cx + w / 2) * dims.width,
            (cy + h / 2) * dims.height,
        )
        boxes.append(LabeledBox(_clamp_parsed(bbox, dims, where), name))
    return ImageAnnotation(image_id, dims, boxes)


def write_yolo(a: ImageAnnotation, classes: ClassMap) -> str:
    """Serialize to YOLO txt; inverse of parse_yolo within a pixel."""
    lines = []
    for b in a.boxes:
        idx = classes.index(b.class_name)
        cx = (b.bbox.x_min + b.bbox.x_max) / 2 / a.dims.width
        cy = (b.bbox.y_min + b.bbox.y_max) / 2 / a.dims.height
        w = b.bbox.width / a.dims.width
        h = b.bbox.height / a.dims.height
        lines.append(f"{idx} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}\n")
    return "".join(lines)


# ---------------------------------------------------------------------------
# COCO JSON (detection subset)


def parse_coco_subset(document: bytes) -> tuple[list[ImageAnnotation], ClassMap]:
    """Parse a COCO-style JSON document into per-image annotations.

    Extra fields are ignored; dangling image/category references are
    errors. Output order follows the file's images array.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid COCO JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("COCO document must be a JSON object")
    for key in ("images", "annotations", "categories"):
        if key not in doc or not isinstance(doc[key], list):
            raise ParseError(f"COCO document missing {key!r} array")

    categories = sorted(doc["categories"], key=lambda c: c.get("id", 0))
    try:
        classes = ClassMap([c["name"] for c in categories])
    except (KeyError, TypeError):
        raise ParseError("COCO category missing 'name'") from None
    except ValueError as exc:
        raise ParseError(f"bad COCO categories: {exc}") from None
    cat_by_id = {}
    for c in categories:
        if "id" not in c:
            raise ParseError("COCO category missing 'id'")
        if c["id"] in cat_by_id:
            raise ParseError(f"duplicate COCO category id {c['id']}")
        cat_by_id[c["id"]] = c["name"]

    images: dict[object, ImageAnnotation] = {}
    order = []
    for im in doc["images"]:
        try:
            image_id = Path(im["file_name"]).stem
            dims = ImageDims(int(im["width"]), int(im["height"]))
            key = im["id"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad COCO image entry: {exc}") from None
        if key in images:
            raise ParseError(f"duplicate COCO image id {key}")
        images[key] = ImageAnnotation(image_id, dims, [])
        order.append(key)

    for ann in doc["annotations"]:
        try:
            img_key = ann["image_id"]
            cat_key = ann["category_id"]
            x, y, w, h = (float(v) for v in ann["bbox"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad COCO annotation entry: {exc}") from None
        if img_key not in images:
            raise ParseError(f"COCO annotation references missing image id {img_key}")
        if cat_key not in cat_by_id:
            raise ParseError(f"COCO annotation references missing category id {cat_key}")
        target = images[img_key]
        where = f"coco image {target.image_id!r}"
        if w <= 0 or h <= 0:
            raise ParseError(f"{where}: degenerate bbox [{x}, {y}, {w}, {h}]")
        bbox = _clamp_parsed(BBox(x, y, x + w, y + h), target.dims, where)
        target.boxes.append(LabeledBox(bbox, cat_by_id[cat_key]))

    return [images[k] for k in order], classes


def write_coco(dataset: list[ImageAnnotation], classes: ClassMap) -> bytes:
    """Serialize a dataset to one COCO JSON document.

    Image ids are assigned 1..n over image_id sort order, category ids
    follow the ClassMap order, so output is deterministic.
    """
    ids = [a.image_id for a in dataset]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate image_id(s): {dupes}")

    images = []
    annotations = []
    ann_id = 1
    for img_num, a in enumerate(sorted(dataset, key=lambda a: a.image_id), start=1):
        images.append(
            {
                "id": img_num,
                "file_name": f"{a.image_id}.jpg",
                "width": a.dims.width,
                "height": a.dims.height,
            }
        )
        for b in a.boxes:
            annotations.append(
                {
                    "id": ann_id,
                    "image_id": img_num,
                    "category_id": classes.index(b.class_name) + 1,
                    "bbox": [b.bbox.x_min, b.bbox.y_min, b.bbox.width, b.bbox.height],
                }
            )
            ann_id += 1

    doc = {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": i + 1, "name": n} for i, n in enumerate(classes.names)],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# File-level loading, saving, conversion


def derive_class_map(dataset: Iterable[ImageAnnotation]) -> ClassMap:
    """ClassMap over all class names present, in sorted order."""
    names = sorted({b.class_name for a in dataset for b in a.boxes})
    if not names:
        raise ValueError("dataset contains no boxes; pass an explicit class list")
    return ClassMap(names)


def load_annotations(
    path: str | Path,
    fmt: str,
    dims: ImageDims | None = None,
    classes: ClassMap | None = None,
) -> tuple[list[ImageAnnotation], ClassMap | None]:
    """Load a dataset from a directory (voc, yolo) or single file (coco)."""
    path = Path(path)
    if fmt == "voc":
        files = sorted(path.glob("*.xml"))
        return [parse_voc_xml(f.read_bytes()) for f in files], classes
    if fmt == "yolo":
        if classes is None:
            classes_file = path / "classes.txt"
            if not classes_file.is_file():
                raise ParseError(f"yolo dataset {path} has no classes.txt and no class list given")
            classes = ClassMap.from_text(classes_file.read_text())
        if dims is None:
            raise ValueError("yolo annotations carry no image size; pass dims")
        anns = []
        for f in sorted(path.glob("*.txt")):
            if f.name == "classes.txt":
                continue
            anns.append(parse_yolo(f.read_text(), dims, classes, image_id=f.stem))
        return anns, classes
    if fmt == "coco":
        if path.is_dir():
            candidates = sorted(path.glob("*.json"))
            if len(candidates) != 1:
                raise ParseError(f"expected exactly one .json file in {path}, found {len(candidates)}")
            path = candidates[0]
        return parse_coco_subset(path.read_bytes())
    raise ValueError(f"unknown format {fmt!r} (expected one of {FORMATS})")


def save_annotations(
    dataset: list[ImageAnnotation],
    fmt: str,
    out_path: str | Path,
    classes: ClassMap | None = None,
) -> None:
    """Write a dataset in the given format under out_path."""
    out_path = Path(out_path)
    if fmt == "voc":
        out_path.mkdir(parents=True, exist_ok=True)
        for a in dataset:
            (out_path / f"{a.image_id}.xml").write_bytes(write_voc_xml(a))
        return
    if classes is None:
        classes = derive_class_map(dataset)
    if fmt == "yolo":
        out_path.mkdir(parents=True, exist_ok=True)
        for a in dataset:
            (out_path / f"{a.image_id}.txt").write_text(write_yolo(a, classes))
        (out_path / "classes.txt").write_text(classes.to_text())
        return
    if fmt == "coco":
        if out_path.is_dir() or not out_path.suffix:
            out_path.mkdir(parents=True, exist_ok=True)
            out_path = out_path / "annotations.json"
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(write_coco(dataset, classes))
        return
    raise ValueError(f"unknown format {fmt!r} (expected one of {FORMATS})")


def convert_files(
    in_path: str | Path,
    from_fmt: str,
    to_fmt: str,
    out_path: str | Path,
    classes: ClassMap | None = None,
    dims: ImageDims | None = None,
) -> int:
    """Convert a dataset between formats; returns the number of images."""
    dataset, found_classes = load_annotations(in_path, from_fmt, dims=dims, classes=classes)
    save_annotations(dataset, to_fmt, out_path, classes=classes or found_classes)
    return len(dataset)
