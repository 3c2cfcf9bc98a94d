"""Shared test helpers: random boxes, synthetic scenes, a brute-force AP oracle.

Everything here is deliberately independent of the library internals it
is used to check: the oracle re-implements matching and AP in plain
Python, and scene ground truth comes from an exhaustive pixel scan of
the drawn mask.
"""

from __future__ import annotations

import random

import numpy as np

from autobox.detector import RasterImage
from autobox.geometry import BBox, ImageDims

WHITE = (255, 255, 255)


def random_box(rng: random.Random, lo: float = 0.0, hi: float = 100.0, min_side: float = 0.5) -> BBox:
    x0 = rng.uniform(lo, hi - min_side)
    y0 = rng.uniform(lo, hi - min_side)
    return BBox(x0, y0, x0 + rng.uniform(min_side, hi - x0), y0 + rng.uniform(min_side, hi - y0))


def random_int_box(rng: random.Random, width: int, height: int, min_side: int = 1) -> BBox:
    # min_side=2 for VOC fixtures: a 1 px side collapses to xmin == xmax
    # in 1-based inclusive integers, which the parser rejects
    x0 = rng.randrange(0, width - min_side)
    y0 = rng.randrange(0, height - min_side)
    return BBox(
        float(x0),
        float(y0),
        float(rng.randrange(x0 + min_side, width + 1)),
        float(rng.randrange(y0 + min_side, height + 1)),
    )


def make_scene(
    rng: np.random.Generator,
    width: int = 160,
    height: int = 120,
    noise: bool = False,
) -> tuple[RasterImage, BBox]:
    """One dark shape (rectangle or ellipse) on a white background.

    The returned ground-truth box is computed by exhaustively scanning
    the drawn mask, not from the shape parameters.
    """
    w = int(rng.integers(30, min(width - 20, 100) + 1))
    h = int(rng.integers(30, min(height - 20, 100) + 1))
    x0 = int(rng.integers(10, width - w - 10 + 1))
    y0 = int(rng.integers(10, height - h - 10 + 1))
    color = rng.integers(0, 100, size=3)

    mask = np.zeros((height, width), dtype=bool)
    if rng.integers(0, 2) == 0:
        mask[y0 : y0 + h, x0 : x0 + w] = True
    else:
        yy, xx = np.mgrid[0:height, 0:width]
        cx, cy = x0 + w / 2, y0 + h / 2
        mask = ((xx + 0.5 - cx) / (w / 2)) ** 2 + ((yy + 0.5 - cy) / (h / 2)) ** 2 <= 1.0

    pixels = np.full((height, width, 3), WHITE, dtype=np.uint8)
    pixels[mask] = color
    if noise:
        jitter = rng.integers(-10, 11, size=pixels.shape)
        pixels = np.clip(pixels.astype(np.int64) + jitter, 0, 255).astype(np.uint8)

    ys, xs = np.nonzero(mask)
    gt = BBox(float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1))
    return RasterImage(ImageDims(width, height), pixels), gt


# ---------------------------------------------------------------------------
# Brute-force scoring oracle (plain Python, no numpy, no library calls)


def oracle_iou(a: tuple, b: tuple) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def oracle_match(preds: list[tuple], gts: list[tuple], thr: float) -> list[tuple]:
    """preds: (score, box4, label); gts: (box4, label) -> (score, box4, is_tp)."""
    order = sorted(preds, key=lambda p: (-p[0], p[1]))
    taken = [False] * len(gts)
    flags = []
    for score, box, label in order:
        best, best_i = 0.0, None
        for i, (gbox, glabel) in enumerate(gts):
            if taken[i] or glabel != label:
                continue
            v = oracle_iou(box, gbox)
            if v > best:
                best, best_i = v, i
        if best_i is not None and best >= thr:
            taken[best_i] = True
            flags.append((score, box, True))
        else:
            flags.append((score, box, False))
    return flags


def oracle_ap(flags: list[tuple], n_gt: int) -> float:
    """Explicit ranked list + precision-envelope area, all-point interpolation."""
    order = sorted(flags, key=lambda f: (-f[0], f[1]))
    if not order:
        return 0.0
    precision, recall = [], []
    tp = 0
    for i, (_, _, is_tp) in enumerate(order, start=1):
        tp += int(is_tp)
        precision.append(tp / i)
        recall.append(tp / n_gt)
    envelope = precision[:]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    ap = 0.0
    prev = 0.0
    for i, r in enumerate(recall):
        if r != prev:
            ap += (r - prev) * envelope[i]
            prev = r
    return ap
