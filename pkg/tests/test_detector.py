import json

import numpy as np
import pytest

from autobox.detector import (
    BackgroundModel,
    Detection,
    RasterImage,
    baseline_detect,
    estimate_background,
    parse_detections,
    read_ppm,
    write_ppm,
)
from autobox.errors import ParseError
from autobox.geometry import BBox, ImageDims
from helpers import WHITE, make_scene


def solid_image(width, height, color):
    pixels = np.full((height, width, 3), color, dtype=np.uint8)
    return RasterImage(ImageDims(width, height), pixels)


def paint(img, x0, y0, x1, y1, color):
    img.pixels[y0:y1, x0:x1] = color


WHITE_BG = BackgroundModel(reference_color=WHITE)


# ---------------------------------------------------------------------------
# PPM codec


def test_read_ppm_minimal_p6():
    img = read_ppm(b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 255, 0]))
    assert img.dims == ImageDims(2, 1)
    assert img.pixels[0, 0].tolist() == [255, 0, 0]
    assert img.pixels[0, 1].tolist() == [0, 255, 0]


def test_read_ppm_p3_matches_p6_twin():
    rng = np.random.default_rng(3)
    pixels = rng.integers(0, 256, size=(4, 5, 3), dtype=np.uint8)
    p6 = b"P6\n5 4\n255\n" + pixels.tobytes()
    p3 = b"P3\n5 4\n255\n" + " ".join(str(v) for v in pixels.ravel()).encode()
    assert np.array_equal(read_ppm(p6).pixels, read_ppm(p3).pixels)


def test_read_ppm_handles_comments():
    img = read_ppm(b"P6\n# made for a test\n2 1\n255\n" + bytes(6))
    assert img.dims == ImageDims(2, 1)


def test_read_ppm_rejects_wide_maxval():
    with pytest.raises(ParseError):
        read_ppm(b"P6\n2 1\n65535\n" + bytes(12))


def test_read_ppm_rejects_bad_magic():
    with pytest.raises(ParseError):
        read_ppm(b"P5\n2 1\n255\n" + bytes(2))


def test_read_ppm_rejects_truncated_payload():
    with pytest.raises(ParseError):
        read_ppm(b"P6\n2 2\n255\n" + bytes(5))


def test_ppm_round_trip():
    rng = np.random.default_rng(4)
    pixels = rng.integers(0, 256, size=(7, 3, 3), dtype=np.uint8)
    img = RasterImage(ImageDims(3, 7), pixels)
    back = read_ppm(write_ppm(img))
    assert back.dims == img.dims
    assert np.array_equal(back.pixels, img.pixels)


# ---------------------------------------------------------------------------
# background estimation


def test_estimate_background_uniform():
    assert estimate_background(solid_image(100, 100, WHITE), 5) == WHITE


def test_estimate_background_ignores_centered_object():
    img = solid_image(100, 100, WHITE)
    paint(img, 20, 20, 80, 80, (200, 30, 30))
    assert estimate_background(img, 5) == WHITE


def test_estimate_background_border_too_wide():
    with pytest.raises(ValueError):
        estimate_background(solid_image(100, 100, WHITE), 100)
    with pytest.raises(ValueError):
        estimate_background(solid_image(100, 100, WHITE), 50)
    with pytest.raises(ValueError):
        estimate_background(solid_image(100, 100, WHITE), 0)


# ---------------------------------------------------------------------------
# baseline detector


def test_baseline_pure_background_is_empty():
    result = baseline_detect(solid_image(100, 100, WHITE), WHITE_BG)
    assert result.detections == []


def test_baseline_single_square():
    img = solid_image(100, 100, WHITE)
    paint(img, 40, 40, 60, 60, (200, 0, 0))  # pixels x,y in [40, 59]
    result = baseline_detect(img, WHITE_BG, image_id="sq")
    assert result.image_id == "sq"
    assert len(result.detections) == 1
    det = result.detections[0]
    assert det.bbox == BBox(40, 40, 60, 60)
    assert det.score == 1.0
    assert det.label == "object"


def test_baseline_two_squares():
    img = solid_image(100, 100, WHITE)
    paint(img, 10, 10, 30, 30, (180, 0, 0))
    paint(img, 60, 60, 90, 90, (0, 0, 180))
    model = BackgroundModel(reference_color=WHITE, min_area_px=10)
    result = baseline_detect(img, model)
    assert len(result.detections) == 2
    assert {d.bbox for d in result.detections} == {BBox(10, 10, 30, 30), BBox(60, 60, 90, 90)}


def test_baseline_min_area_filters_speckle():
    img = solid_image(100, 100, WHITE)
    paint(img, 50, 50, 53, 53, (0, 0, 0))  # 9 px
    assert baseline_detect(img, WHITE_BG).detections == []
    relaxed = BackgroundModel(reference_color=WHITE, min_area_px=9)
    assert len(baseline_detect(img, relaxed).detections) == 1


def test_baseline_score_is_fill_ratio():
    img = solid_image(100, 100, WHITE)
    # L-shape: 20x10 plus 10x10 leg -> area 300, bbox 20x20
    paint(img, 10, 10, 30, 20, (0, 0, 0))
    paint(img, 10, 20, 20, 30, (0, 0, 0))
    det = baseline_detect(img, WHITE_BG).detections[0]
    assert det.bbox == BBox(10, 10, 30, 30)
    assert det.score == pytest.approx(300 / 400)


def test_baseline_sort_by_score_then_position():
    img = solid_image(100, 100, WHITE)
    paint(img, 60, 60, 80, 80, (0, 0, 0))  # same fill ratio 1.0
    paint(img, 10, 10, 30, 30, (0, 0, 0))
    model = BackgroundModel(reference_color=WHITE, min_area_px=10)
    dets = baseline_detect(img, model).detections
    assert [d.bbox.x_min for d in dets] == [10, 60]


def test_baseline_translation_equivariance():
    rng = np.random.default_rng(11)
    for _ in range(5):
        img, _ = make_scene(rng)
        base = baseline_detect(img, WHITE_BG)
        dx, dy = 7, 4
        shifted_pixels = np.full_like(img.pixels, 255)
        shifted_pixels[dy:, dx:] = img.pixels[:-dy, :-dx]
        shifted = RasterImage(img.dims, shifted_pixels)
        moved = baseline_detect(shifted, WHITE_BG)
        assert len(moved.detections) == len(base.detections) == 1
        for a, b in zip(base.detections, moved.detections):
            assert b.bbox == BBox(
                a.bbox.x_min + dx, a.bbox.y_min + dy, a.bbox.x_max + dx, a.bbox.y_max + dy
            )


def test_baseline_boxes_are_tight():
    rng = np.random.default_rng(12)
    for _ in range(5):
        img, _ = make_scene(rng)
        mask = (img.pixels != 255).any(axis=2)
        for det in baseline_detect(img, WHITE_BG).detections:
            x0, y0, x1, y1 = (int(v) for v in det.bbox.as_tuple())
            assert mask[y0:y1, x0].any() and mask[y0:y1, x1 - 1].any()
            assert mask[y0, x0:x1].any() and mask[y1 - 1, x0:x1].any()


def test_baseline_exact_at_zero_tolerance():
    # at tolerance 0 the mask equals the drawn shape exactly: a rectangle
    # must come back as its own box with fill ratio 1.0
    img = solid_image(120, 80, WHITE)
    paint(img, 17, 23, 64, 71, (254, 255, 255))  # barely off-background
    model = BackgroundModel(reference_color=WHITE, tolerance=0.0, min_area_px=1)
    dets = baseline_detect(img, model).detections
    assert len(dets) == 1
    assert dets[0].bbox == BBox(17, 23, 64, 71)
    assert dets[0].score == 1.0


# ---------------------------------------------------------------------------
# detection wire format


GOOD_LINE = (
    '{"schema_version":1,"image":{"id":"img1","width":100,"height":100},'
    '"detections":[{"bbox":[10,10,20,20],"score":0.9,"label":"object"}]}'
)


def test_parse_detections_single_line():
    sets = parse_detections(GOOD_LINE + "\n")
    assert len(sets) == 1
    s = sets[0]
    assert s.image_id == "img1"
    assert s.dims == ImageDims(100, 100)
    assert s.detections == [Detection(BBox(10, 10, 20, 20), 0.9, "object")]


def test_parse_detections_empty_list_is_valid():
    line = '{"schema_version":1,"image":{"id":"a","width":10,"height":10},"detections":[]}'
    sets = parse_detections(line)
    assert sets[0].detections == []


def test_parse_detections_score_out_of_range():
    bad = GOOD_LINE.replace('"score":0.9', '"score":1.5')
    with pytest.raises(ParseError, match="line 1"):
        parse_detections(bad)


def test_parse_detections_unknown_field_rejected():
    bad = GOOD_LINE[:-1] + ',"extra":true}'
    with pytest.raises(ParseError, match="unknown field"):
        parse_detections(bad)


def test_parse_detections_missing_field():
    bad = '{"schema_version":1,"image":{"id":"a","width":10,"height":10}}'
    with pytest.raises(ParseError, match="missing field"):
        parse_detections(bad)


def test_parse_detections_reports_line_number():
    stream = GOOD_LINE + "\n" + "{not json}\n"
    with pytest.raises(ParseError, match="line 2"):
        parse_detections(stream)


def test_parse_detections_wrong_schema_version():
    bad = GOOD_LINE.replace('"schema_version":1', '"schema_version":2')
    with pytest.raises(ParseError, match="schema_version"):
        parse_detections(bad)


def test_parse_detections_clamps_overhang():
    line = (
        '{"schema_version":1,"image":{"id":"a","width":100,"height":100},'
        '"detections":[{"bbox":[-5,90,50,120],"score":0.5,"label":"object"}]}'
    )
    det = parse_detections(line)[0].detections[0]
    assert det.bbox == BBox(0, 90, 50, 100)


def test_parse_detections_rejects_box_fully_outside():
    line = (
        '{"schema_version":1,"image":{"id":"a","width":100,"height":100},'
        '"detections":[{"bbox":[150,150,160,160],"score":0.5,"label":"object"}]}'
    )
    with pytest.raises(ParseError, match="line 1"):
        parse_detections(line)


def test_parse_detections_skips_blank_lines_and_keeps_order():
    lines = []
    for i in range(5):
        lines.append(json.dumps({
            "schema_version": 1,
            "image": {"id": f"img{i}", "width": 10, "height": 10},
            "detections": [],
        }))
    stream = lines[0] + "\n\n" + "\n".join(lines[1:]) + "\n"
    assert [s.image_id for s in parse_detections(stream)] == [f"img{i}" for i in range(5)]


def test_detection_score_validated():
    with pytest.raises(ValueError):
        Detection(BBox(0, 0, 1, 1), 1.2, "object")


def test_parse_detections_total_on_schema():
    # every accepted line yields a set whose boxes sit inside the image
    import random

    rng = random.Random(13)
    lines = []
    for i in range(200):
        w, h = rng.randrange(20, 300), rng.randrange(20, 300)
        dets = []
        for _ in range(rng.randrange(0, 4)):
            x0, y0 = rng.uniform(0, w - 1), rng.uniform(0, h - 1)
            dets.append({
                "bbox": [x0, y0, x0 + rng.uniform(0.5, w), y0 + rng.uniform(0.5, h)],
                "score": round(rng.random(), 4),
                "label": "object",
            })
        lines.append(json.dumps({
            "schema_version": 1,
            "image": {"id": f"im{i}", "width": w, "height": h},
            "detections": dets,
        }))
    for s in parse_detections("\n".join(lines)):
        for d in s.detections:
            assert 0 <= d.bbox.x_min <= d.bbox.x_max <= s.dims.width
            assert 0 <= d.bbox.y_min <= d.bbox.y_max <= s.dims.height
            assert 0 <= d.score <= 1
