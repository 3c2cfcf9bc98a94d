"""Connected-component labeling kernels.

Two interchangeable backends produce identical labelings:

* ``numba``: two-pass union-find scan compiled with ``@njit``; the hot
  path for real image sizes.
* ``numpy``: vectorized iterative min-label propagation; pure-numpy
  fallback when numba is unavailable or disabled.

Set ``AUTOBOX_NUMBA=0`` (or ``false``/``no``/``off``) to force the numpy
backend. Components are numbered 1..n in order of first appearance in a
row-major scan, so results are byte-identical across backends.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = os.environ.get("AUTOBOX_NUMBA", "1").strip().lower()
_NUMBA_WANTED = _ENV_FLAG not in ("0", "false", "no", "off")

try:
    if not _NUMBA_WANTED:
        raise ImportError("numba disabled via AUTOBOX_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _label_two_pass_impl(mask, eight_connected):
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    # provisional labels never exceed the foreground pixel count
    parent = np.zeros(h * w + 1, dtype=np.int32)
    next_label = 1

    for y in range(h):
        for x in range(w):
            if mask[y, x] == 0:
                continue
            # neighbors already scanned: W, N (+ NW, NE for 8-connectivity)
            n0 = labels[y, x - 1] if x > 0 else 0
            n1 = labels[y - 1, x] if y > 0 else 0
            n2 = 0
            n3 = 0
            if eight_connected and y > 0:
                if x > 0:
                    n2 = labels[y - 1, x - 1]
                if x < w - 1:
                    n3 = labels[y - 1, x + 1]

            best = 0
            for n in (n0, n1, n2, n3):
                if n == 0:
                    continue
                r = n
                while parent[r] != r:
                    parent[r] = parent[parent[r]]
                    r = parent[r]
                if best == 0 or r < best:
                    best = r

            if best == 0:
                parent[next_label] = next_label
                labels[y, x] = next_label
                next_label += 1
            else:
                labels[y, x] = best
                for n in (n0, n1, n2, n3):
                    if n == 0:
                        continue
                    r = n
                    while parent[r] != r:
                        parent[r] = parent[parent[r]]
                        r = parent[r]
                    if r != best:
                        parent[r] = best

    # second pass: roots -> consecutive ids in row-major first-appearance order
    remap = np.zeros(next_label, dtype=np.int32)
    count = 0
    for y in range(h):
        for x in range(w):
            lbl = labels[y, x]
            if lbl == 0:
                continue
            r = lbl
            while parent[r] != r:
                r = parent[r]
            if remap[r] == 0:
                count += 1
                remap[r] = count
            labels[y, x] = remap[r]
    return labels, count


if HAVE_NUMBA:
    _label_two_pass = njit(cache=True)(_label_two_pass_impl)
else:
    _label_two_pass = _label_two_pass_impl


def _label_propagate(mask, eight_connected):
    """Pure-numpy labeling: propagate the minimum seed label to a fixpoint."""
    h, w = mask.shape
    fg = mask != 0
    big = np.int64(h * w + 1)

    seeds = np.arange(1, h * w + 1, dtype=np.int64).reshape(h, w)
    lab = np.where(fg, seeds, big)

    if eight_connected:
        offsets = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
    else:
        offsets = ((-1, 0), (0, -1), (0, 1), (1, 0))

    padded = np.full((h + 2, w + 2), big, dtype=np.int64)
    while True:
        padded[1:-1, 1:-1] = lab
        new = lab.copy()
        for dy, dx in offsets:
            np.minimum(new, padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w], out=new)
        new = np.where(fg, new, big)
        if np.array_equal(new, lab):
            break
        lab = new

    roots = np.unique(lab[fg])  # ascending == row-major first appearance
    labels = np.zeros((h, w), dtype=np.int32)
    if roots.size:
        labels[fg] = np.searchsorted(roots, lab[fg]) + 1
    return labels, int(roots.size)


DEFAULT_BACKEND = "numba" if HAVE_NUMBA else "numpy"


def label_components(mask: np.ndarray, connectivity: int = 8, backend: str | None = None):
    """Label connected foreground regions of a 2D mask.

    Returns ``(labels, count)`` where labels is int32 with background 0
    and components numbered 1..count in row-major first-appearance order.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2D, got shape {mask.shape}")
    if backend is None:
        backend = DEFAULT_BACKEND

    m = np.ascontiguousarray(mask != 0).astype(np.uint8)
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not available")
        return _label_two_pass(m, connectivity == 8)
    if backend == "numpy":
        return _label_propagate(m, connectivity == 8)
    raise ValueError(f"unknown backend {backend!r} (expected 'numba' or 'numpy')")


def component_stats(labels: np.ndarray, count: int):
    """Per-component tight bounds and pixel areas.

    Returns (min_x, min_y, max_x, max_y, area) arrays indexed by
    component id - 1. Bounds are inclusive pixel indices.
    """
    h, w = labels.shape
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs] - 1
    area = np.bincount(ids, minlength=count)
    min_x = np.full(count, w, dtype=np.int64)
    min_y = np.full(count, h, dtype=np.int64)
    max_x = np.full(count, -1, dtype=np.int64)
    max_y = np.full(count, -1, dtype=np.int64)
    np.minimum.at(min_x, ids, xs)
    np.minimum.at(min_y, ids, ys)
    np.maximum.at(max_x, ids, xs)
    np.maximum.at(max_y, ids, ys)
    return min_x, min_y, max_x, max_y, area
