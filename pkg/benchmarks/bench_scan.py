#!/usr/bin/env python3
"""Benchmark the compiled scan kernels against the NumPy fallback.

Runs the three kernel entry points and the full detection pipeline on
masks of a few sizes and prints a timing table. The detect() timing uses
whichever backend the package selected at import; set
ROWTRACK_PURE_PYTHON=1 before running to force the fallback there.
"""

from __future__ import annotations

import time

import numpy as np

from rowtrack import _scan_py
from rowtrack._kernels import BACKEND
from rowtrack.mask import Mask
from rowtrack.scan import ScanConfig, detect

try:
    from rowtrack import _scan_cy
except ImportError:
    _scan_cy = None


def timeit(fn, repeats=200):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_size(size: int, rng) -> None:
    grid = (rng.random((size, size)) < 0.3).astype(np.uint8)
    grid = np.ascontiguousarray(grid)
    cfg = ScanConfig()
    h = cfg.roi_height(size)
    x_lo, x_hi = int(0.2 * size), int(0.7 * size)
    b, c = int(0.4 * size), int(0.9 * size) - 1
    ax = size // 2

    cases = {
        "column_sums": lambda impl: impl.column_sums(grid, 0, h, x_lo, x_hi + 1),
        "row_sums": lambda impl: impl.row_sums(grid, h, 2 * h),
        "line_scores": lambda impl: impl.line_scores(grid, ax, 0, b, c),
    }

    print(f"\nmask {size}x{size}")
    print(f"  {'kernel':<14} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    for name, call in cases.items():
        t_py = timeit(lambda: call(_scan_py))
        if _scan_cy is not None:
            t_cy = timeit(lambda: call(_scan_cy))
            print(f"  {name:<14} {t_py * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us {t_py / t_cy:>8.1f}x")
        else:
            print(f"  {name:<14} {t_py * 1e6:>10.1f}us {'n/a':>12} {'':>9}")

    mask = Mask(grid)
    t_detect = timeit(lambda: detect(mask, cfg), repeats=50)
    print(f"  full detect ({BACKEND} backend): {t_detect * 1e3:.3f} ms")


def main() -> None:
    print(f"active kernel backend: {BACKEND}")
    rng = np.random.default_rng(1)
    for size in (128, 256, 512):
        bench_size(size, rng)


if __name__ == "__main__":
    main()
