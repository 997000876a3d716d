"""NumPy implementations of the scan kernels.

Fallback used when the compiled extension is unavailable (or forced via
ROWTRACK_PURE_PYTHON=1). Must produce bit-identical results to the
compiled kernels in rowtrack._scan_cy.
"""

from __future__ import annotations

import numpy as np


def column_sums(px: np.ndarray, y0: int, y1: int, x0: int, x1: int) -> np.ndarray:
    """Per-column pixel sums over rows [y0, y1) for columns [x0, x1)."""
    return px[y0:y1, x0:x1].sum(axis=0, dtype=np.int64)


def row_sums(px: np.ndarray, y0: int, y1: int) -> np.ndarray:
    """Per-row pixel sums over rows [y0, y1), full image width."""
    return px[y0:y1, :].sum(axis=1, dtype=np.int64)


def line_scores(px: np.ndarray, ax: int, ay: int, b: int, c: int) -> np.ndarray:
    """Path sums for every bottom-edge candidate p in [b, c].

    The scored path runs vertically at column ax for rows [0, ay), then
    one pixel per row from (ax, ay) to (p, H-1) using round-half-up
    linear interpolation.
    """
    h = px.shape[0]
    base = int(px[:ay, ax].sum(dtype=np.int64))
    dy = (h - 1) - ay
    ps = np.arange(b, c + 1, dtype=np.int64)
    if dy == 0:
        return np.full(ps.shape, base + int(px[h - 1, ax]), dtype=np.int64)
    ys = np.arange(ay, h, dtype=np.int64)
    # round-half-up(n/d) == (2n + d) // (2d); numpy // floors, matching Python.
    num = 2 * np.outer(ps - ax, ys - ay) + dy
    xs = ax + num // (2 * dy)
    return base + px[ys[None, :], xs].sum(axis=1, dtype=np.int64)
