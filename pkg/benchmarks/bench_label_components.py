"""Benchmark the connected-component kernels: numba njit vs pure numpy.

Usage:
    python benchmarks/bench_label_components.py [--sizes 256,512,1024] [--repeat 5]

Masks mix random blobs and speckle so both backends see realistic
component counts. The numba backend is warmed up before timing so JIT
compilation is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from autobox._kernels import HAVE_NUMBA, label_components


def blob_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    mask = np.zeros((size, size), dtype=bool)
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(max(4, size // 64)):
        cx, cy = rng.integers(0, size, 2)
        rx, ry = rng.integers(size // 32, size // 6, 2)
        mask |= ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    mask |= rng.random((size, size)) < 0.001  # speckle
    return mask


def time_backend(backend: str, masks: list[np.ndarray], repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for m in masks:
            label_components(m, 8, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="256,512,1024",
                        help="comma-separated mask edge lengths (default: 256,512,1024)")
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best-of (default: 5)")
    parser.add_argument("--masks", type=int, default=4,
                        help="masks per size (default: 4)")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(0)
    if HAVE_NUMBA:
        label_components(blob_mask(rng, 64), 8, backend="numba")  # compile outside timing

    print(f"{'size':>6} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}")
    for size in sizes:
        masks = [blob_mask(rng, size) for _ in range(args.masks)]
        t_numpy = time_backend("numpy", masks, args.repeat) * 1000 / args.masks
        if HAVE_NUMBA:
            t_numba = time_backend("numba", masks, args.repeat) * 1000 / args.masks
            print(f"{size:>6} {t_numpy:>12.2f} {t_numba:>12.2f} {t_numpy / t_numba:>7.1f}x")
        else:
            print(f"{size:>6} {t_numpy:>12.2f} {'n/a':>12} {'n/a':>8}")
    if not HAVE_NUMBA:
        print("numba unavailable or disabled (AUTOBOX_NUMBA); numpy fallback only")


if __name__ == "__main__":
    main()
