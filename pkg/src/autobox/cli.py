"""Command-line interface.

Subcommands: annotate, evaluate, convert, split. Summaries and reports
go to stdout as JSON so invocations compose by redirection; diagnostics
go to stderr. Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import annotations as anns
from . import detector, evaluation, pipeline
from .errors import ParseError
from .geometry import ImageDims, PostProcessConfig

log = logging.getLogger("autobox")


def _parse_dims(text: str) -> ImageDims:
    try:
        w, h = text.lower().split("x")
        return ImageDims(int(w), int(h))
    except ValueError:
        raise ValueError(f"expected dimensions as WIDTHxHEIGHT, got {text!r}") from None


def _parse_rgb(text: str) -> tuple[int, int, int]:
    t = text.lstrip("#")
    if len(t) != 6:
        raise ValueError(f"expected color as RRGGBB hex, got {text!r}")
    try:
        return (int(t[0:2], 16), int(t[2:4], 16), int(t[4:6], 16))
    except ValueError:
        raise ValueError(f"expected color as RRGGBB hex, got {text!r}") from None


def _load_class_map(path: str | None) -> anns.ClassMap | None:
    if path is None:
        return None
    return anns.ClassMap.from_text(Path(path).read_text())


def _detect_format(path: Path) -> str:
    """Guess an annotation source's format from its layout."""
    if path.is_file():
        if path.suffix == ".jsonl":
            return "detections"
        if path.suffix == ".json":
            return "coco"
        raise ValueError(f"cannot tell the format of file {path}")
    if not path.is_dir():
        raise ValueError(f"no such file or directory: {path}")
    if any(path.glob("*.xml")):
        return "voc"
    if any(path.glob("*.json")):
        return "coco"
    if any(path.glob("*.txt")):
        return "yolo"
    raise ValueError(f"directory {path} contains no recognizable annotation files")


def _load_gt(path: Path, fmt: str | None, dims: ImageDims | None, classes) -> list:
    fmt = fmt or _detect_format(path)
    if fmt == "detections":
        raise ValueError("ground truth must be an annotation format, not a detection stream")
    dataset, _ = anns.load_annotations(path, fmt, dims=dims, classes=classes)
    return dataset


def _load_preds(path: Path, fmt: str | None, dims: ImageDims | None, classes) -> list:
    """Predictions: a .jsonl detection stream, or annotations taken at score 1.0."""
    fmt = fmt or _detect_format(path)
    if fmt == "detections":
        return detector.parse_detections(path.read_text())
    dataset, _ = anns.load_annotations(path, fmt, dims=dims, classes=classes)
    return [
        detector.DetectionSet(
            a.image_id,
            a.dims,
            [detector.Detection(b.bbox, 1.0, b.class_name) for b in a.boxes],
        )
        for a in dataset
    ]


# ---------------------------------------------------------------------------
# annotate


def _cmd_annotate(args: argparse.Namespace) -> int:
    cfg = pipeline.AnnotateConfig(
        operator_label=args.label,
        score_threshold=args.score_threshold,
        post=PostProcessConfig(merge_enabled=args.merge, slack_px=args.slack),
        output_format=args.format,
    )

    if args.detections:
        sets = detector.parse_detections(Path(args.detections).read_text())
    else:
        model_color = _parse_rgb(args.bg_color) if args.bg_color else None
        sets = []
        image_files = sorted(Path(args.images).glob("*.ppm"))
        if not image_files:
            raise ValueError(f"no .ppm images found in {args.images}")
        for f in image_files:
            img = detector.read_ppm(f.read_bytes())
            color = model_color or detector.estimate_background(img, args.auto_bg)
            model = detector.BackgroundModel(
                reference_color=color,
                tolerance=args.tolerance,
                min_area_px=args.min_area,
                connectivity=args.connectivity,
            )
            sets.append(detector.baseline_detect(img, model, image_id=f.stem))

    summary = pipeline.run_batch(sets, cfg, args.out)
    print(json.dumps(summary.as_dict()))
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = evaluation.EvalConfig(
        iou_threshold=args.iou,
        oversize_factor=args.oversize,
        hit_iou=args.hit_iou,
        score_threshold=args.score_threshold,
    )
    dims = _parse_dims(args.dims) if args.dims else None
    classes = _load_class_map(args.classes)

    gt = _load_gt(Path(args.gt), args.gt_format, dims, classes)
    preds = _load_preds(Path(args.pred), args.pred_format, dims, classes)

    report = evaluation.evaluate(preds, gt, cfg).as_dict()
    if args.categorize:
        kinds = tuple(k.strip() for k in args.distractor_classes.split(",") if k.strip())
        report["categories"] = evaluation.categorize_dataset(
            preds, gt, cfg, distractor_classes=kinds
        ).as_dict()

    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


# ---------------------------------------------------------------------------
# convert


def _cmd_convert(args: argparse.Namespace) -> int:
    dims = _parse_dims(args.dims) if args.dims else None
    classes = _load_class_map(args.classes)
    count = anns.convert_files(
        args.input, args.from_fmt, args.to_fmt, args.out, classes=classes, dims=dims
    )
    print(json.dumps({"converted": count}))
    return 0


# ---------------------------------------------------------------------------
# split


def _cmd_split(args: argparse.Namespace) -> int:
    if args.ids:
        ids = [line.strip() for line in Path(args.ids).read_text().splitlines() if line.strip()]
    else:
        ids = sorted(f.stem for f in Path(args.dir).iterdir() if f.is_file())
    cfg = pipeline.SplitConfig(train_fraction=args.ratio, seed=args.seed)
    train, val = pipeline.split_dataset(ids, cfg)
    pipeline.write_split(train, val, args.out)
    print(json.dumps({"train": len(train), "val": len(val)}))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autobox",
        description="Single-object auto-annotation: box post-processing, "
        "format conversion, and detection scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="turn detections into annotation files")
    src = p.add_argument_group("detection source (exactly one)")
    src.add_argument("--detections", metavar="FILE", help="detection JSON Lines stream")
    src.add_argument("--baseline", action="store_true", help="run the built-in background-distance detector")
    src.add_argument("--images", metavar="DIR", help="PPM image directory for --baseline")
    p.add_argument("--label", required=True, help="class name for every emitted box")
    p.add_argument("--merge", default=True, action=argparse.BooleanOptionalAction,
                   help="merge surviving boxes into one (default: on)")
    p.add_argument("--slack", type=float, default=0.0, metavar="N",
                   help="pixels added on each side (default: 0)")
    p.add_argument("--score-threshold", type=float, default=0.5, metavar="T",
                   help="minimum detection score (default: 0.5)")
    p.add_argument("--format", choices=pipeline.OUTPUT_FORMATS, default="voc",
                   help="output annotation format (default: voc)")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--bg-color", metavar="RRGGBB", default=None,
                   help="baseline background color (default: estimated per image)")
    p.add_argument("--tolerance", type=float, default=40.0, metavar="T",
                   help="baseline RGB distance threshold (default: 40)")
    p.add_argument("--min-area", type=int, default=64, metavar="A",
                   help="baseline minimum component area in px (default: 64)")
    p.add_argument("--auto-bg", type=int, default=10, metavar="BORDER",
                   help="border width for background estimation (default: 10)")
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8,
                   help="baseline component connectivity (default: 8)")
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--pred", required=True, metavar="PATH",
                   help="predictions: detection .jsonl, or annotations scored 1.0")
    p.add_argument("--gt", required=True, metavar="PATH", help="ground-truth annotations")
    p.add_argument("--iou", type=float, default=0.5,
                   help="IoU threshold for a match (default: 0.5)")
    p.add_argument("--score-threshold", type=float, default=0.0, metavar="T",
                   help="operating score threshold for precision/recall (default: 0)")
    p.add_argument("--categorize", action="store_true",
                   help="add the per-image result-category block (default: off)")
    p.add_argument("--hit-iou", type=float, default=0.1, metavar="T",
                   help="IoU at which a box counts as touching the object (default: 0.1)")
    p.add_argument("--oversize", type=float, default=2.0, metavar="F",
                   help="area factor marking an oversized box (default: 2.0)")
    p.add_argument("--distractor-classes", default=",".join(evaluation.DISTRACTOR_KINDS),
                   metavar="NAMES", help="comma-separated distractor region classes "
                   "(default: head_face,hand,body)")
    p.add_argument("--gt-format", choices=anns.FORMATS, default=None,
                   help="ground-truth format (default: detected from layout)")
    p.add_argument("--pred-format", choices=anns.FORMATS + ("detections",), default=None,
                   help="prediction format (default: detected from layout)")
    p.add_argument("--dims", metavar="WxH", default=None,
                   help="image size for yolo sources (default: none)")
    p.add_argument("--classes", metavar="FILE", default=None,
                   help="class list for yolo sources (default: classes.txt next to them)")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="also write the report JSON here (default: stdout only)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("convert", help="convert annotations between formats")
    p.add_argument("--from", dest="from_fmt", choices=anns.FORMATS, required=True,
                   help="input format")
    p.add_argument("--to", dest="to_fmt", choices=anns.FORMATS, required=True,
                   help="output format")
    p.add_argument("--in", dest="input", required=True, metavar="PATH",
                   help="input directory (voc, yolo) or file (coco)")
    p.add_argument("--out", required=True, metavar="PATH", help="output directory or file")
    p.add_argument("--classes", metavar="FILE", default=None,
                   help="class list file (default: derived from the data)")
    p.add_argument("--dims", metavar="WxH", default=None,
                   help="image size for yolo input (default: none)")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("split", help="deterministic train/val split")
    p.add_argument("--ids", metavar="FILE", default=None,
                   help="file with one image id per line")
    p.add_argument("--dir", metavar="DIR", default=None,
                   help="directory whose file stems are the ids")
    p.add_argument("--ratio", type=float, default=0.9,
                   help="train fraction, open interval (0, 1) (default: 0.9)")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed (default: 0)")
    p.add_argument("--out", default=".", metavar="DIR",
                   help="directory for train.txt and val.txt (default: .)")
    p.set_defaults(func=_cmd_split)

    return parser


def _validate_usage(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "annotate":
        if bool(args.detections) == bool(args.baseline):
            parser.error("exactly one of --detections or --baseline is required")
        if args.baseline and not args.images:
            parser.error("--baseline requires --images DIR")
        if args.slack < 0:
            parser.error("--slack must be >= 0")
        if not 0.0 <= args.score_threshold <= 1.0:
            parser.error("--score-threshold must be in [0, 1]")
    elif args.command == "split":
        if bool(args.ids) == bool(args.dir):
            parser.error("exactly one of --ids or --dir is required")
        if not 0.0 < args.ratio < 1.0:
            parser.error("--ratio must be strictly between 0 and 1")
    elif args.command == "evaluate":
        if not 0.0 < args.iou <= 1.0:
            parser.error("--iou must be in (0, 1]")
    elif args.command == "convert":
        if args.to_fmt == "yolo" and args.from_fmt == "yolo" and args.dims is None:
            parser.error("yolo input requires --dims")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_usage(parser, args)
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
