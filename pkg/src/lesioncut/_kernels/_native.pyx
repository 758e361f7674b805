# cython: language_level=3
"""Compiled implementations of the two per-pixel hot loops."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def median_filter_u8(cnp.uint8_t[:, ::1] img, int window):
    """Exact median over a window*window neighborhood, zero padded.

    A 256-bin histogram slides along each row: one column of samples is
    removed and one added per step, then the median is read off the
    cumulative counts. Out-of-bounds samples land in bin 0.
    """
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef int r = window // 2
    cdef int need = (window * window) // 2 + 1
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((h, w), dtype=np.uint8)
    cdef int hist[256]
    cdef Py_ssize_t y, x, cx, ry, dy
    cdef int cum, v

    for y in range(h):
        for v in range(256):
            hist[v] = 0
        for cx in range(-r, r + 1):
            _add_column(img, hist, h, w, y, cx, r)
        out[y, 0] = _histogram_median(hist, need)
        for x in range(1, w):
            _remove_column(img, hist, h, w, y, x - 1 - r, r)
            _add_column(img, hist, h, w, y, x + r, r)
            out[y, x] = _histogram_median(hist, need)
    return out


cdef inline void _add_column(cnp.uint8_t[:, ::1] img, int* hist,
                             Py_ssize_t h, Py_ssize_t w,
                             Py_ssize_t y, Py_ssize_t cx, int r) noexcept:
    cdef Py_ssize_t dy, ry
    if cx < 0 or cx >= w:
        hist[0] += 2 * r + 1
        return
    for dy in range(-r, r + 1):
        ry = y + dy
        if ry < 0 or ry >= h:
            hist[0] += 1
        else:
            hist[img[ry, cx]] += 1


cdef inline void _remove_column(cnp.uint8_t[:, ::1] img, int* hist,
                                Py_ssize_t h, Py_ssize_t w,
                                Py_ssize_t y, Py_ssize_t cx, int r) noexcept:
    cdef Py_ssize_t dy, ry
    if cx < 0 or cx >= w:
        hist[0] -= 2 * r + 1
        return
    for dy in range(-r, r + 1):
        ry = y + dy
        if ry < 0 or ry >= h:
            hist[0] -= 1
        else:
            hist[img[ry, cx]] -= 1


cdef inline int _histogram_median(int* hist, int need) noexcept:
    cdef int cum = 0
    cdef int v
    for v in range(256):
        cum += hist[v]
        if cum >= need:
            return v
    return 255


def affinity_entries(double[:, ::1] field,
                     cnp.int64_t[::1] dys,
                     cnp.int64_t[::1] dxs,
                     double[::1] spatial_factors,
                     double inv_sigma_i2):
    """Upper-half affinity entries, offset-major and row-major per offset."""
    cdef Py_ssize_t h = field.shape[0]
    cdef Py_ssize_t w = field.shape[1]
    cdef Py_ssize_t n_offsets = dys.shape[0]
    cdef Py_ssize_t k, dy, dx, x0, ncols, nrows, y, x, pos
    cdef Py_ssize_t total = 0

    for k in range(n_offsets):
        dy = dys[k]
        dx = dxs[k]
        nrows = h - dy
        ncols = w - (dx if dx >= 0 else -dx)
        if nrows > 0 and ncols > 0:
            total += nrows * ncols

    cdef cnp.ndarray[cnp.int64_t, ndim=1] rows = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cols = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.empty(total, dtype=np.float64)
    cdef double sfac, diff
    cdef Py_ssize_t i, j

    pos = 0
    for k in range(n_offsets):
        dy = dys[k]
        dx = dxs[k]
        sfac = spatial_factors[k]
        nrows = h - dy
        ncols = w - (dx if dx >= 0 else -dx)
        if nrows <= 0 or ncols <= 0:
            continue
        x0 = 0 if dx >= 0 else -dx
        for y in range(nrows):
            for x in range(x0, x0 + ncols):
                i = y * w + x
                j = (y + dy) * w + (x + dx)
                diff = field[y, x] - field[y + dy, x + dx]
                rows[pos] = i
                cols[pos] = j
                vals[pos] = exp(-(diff * diff) * inv_sigma_i2) * sfac
                pos += 1
    return rows, cols, vals
