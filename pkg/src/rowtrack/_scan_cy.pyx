# cython: boundscheck=False, wraparound=False
"""Compiled scan kernels: tight loops over a contiguous uint8 mask."""

import numpy as np


def column_sums(const unsigned char[:, ::1] px, Py_ssize_t y0, Py_ssize_t y1,
                Py_ssize_t x0, Py_ssize_t x1):
    """Per-column pixel sums over rows [y0, y1) for columns [x0, x1)."""
    cdef Py_ssize_t n = x1 - x0
    out = np.zeros(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t x, y
    cdef long long s
    for x in range(n):
        s = 0
        for y in range(y0, y1):
            s += px[y, x0 + x]
        o[x] = s
    return out


def row_sums(const unsigned char[:, ::1] px, Py_ssize_t y0, Py_ssize_t y1):
    """Per-row pixel sums over rows [y0, y1), full image width."""
    cdef Py_ssize_t n = y1 - y0
    cdef Py_ssize_t w = px.shape[1]
    out = np.zeros(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t x, y
    cdef long long s
    for y in range(n):
        s = 0
        for x in range(w):
            s += px[y0 + y, x]
        o[y] = s
    return out


def line_scores(const unsigned char[:, ::1] px, Py_ssize_t ax, Py_ssize_t ay,
                Py_ssize_t b, Py_ssize_t c):
    """Path sums for every bottom-edge candidate p in [b, c].

    Path: vertical run at column ax for rows [0, ay), then one pixel per
    row from (ax, ay) to (p, H-1), round-half-up interpolation.
    """
    cdef Py_ssize_t h = px.shape[0]
    cdef Py_ssize_t n = c - b + 1
    cdef Py_ssize_t dy = (h - 1) - ay
    out = np.zeros(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long base = 0
    cdef Py_ssize_t i, y, x, dx
    cdef long long s
    for y in range(ay):
        base += px[y, ax]
    if dy == 0:
        for i in range(n):
            o[i] = base + px[h - 1, ax]
        return out
    for i in range(n):
        dx = b + i - ax
        s = base
        for y in range(ay, h):
            # round-half-up(dx*(y-ay)/dy); // keeps Python floor semantics.
            x = ax + (2 * dx * (y - ay) + dy) // (2 * dy)
            s += px[y, x]
        o[i] = s
    return out
