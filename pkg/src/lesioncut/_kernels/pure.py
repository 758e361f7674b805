"""NumPy/SciPy fallback implementations of the hot kernels."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

__all__ = ["affinity_entries", "median_filter_u8"]


def median_filter_u8(img: np.ndarray, window: int) -> np.ndarray:
    """Exact median with zero padding; delegates to scipy.ndimage."""
    return ndimage.median_filter(img, size=window, mode="constant", cval=0)


def affinity_entries(
    field: np.ndarray,
    dys: np.ndarray,
    dxs: np.ndarray,
    spatial_factors: np.ndarray,
    inv_sigma_i2: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized pair enumeration via shifted array slices.

    Entries are emitted offset-major and row-major within each offset,
    matching the native kernel's order exactly.
    """
    h, w = field.shape
    rows_parts: list[np.ndarray] = []
    cols_parts: list[np.ndarray] = []
    vals_parts: list[np.ndarray] = []
    for dy, dx, sfac in zip(dys, dxs, spatial_factors):
        dy = int(dy)
        dx = int(dx)
        if h - dy <= 0 or w - abs(dx) <= 0:
            continue
        x0 = max(0, -dx)
        ncols = w - abs(dx)
        a = field[0 : h - dy, x0 : x0 + ncols]
        b = field[dy:h, x0 + dx : x0 + dx + ncols]
        diff = a - b
        vals = np.exp(-(diff * diff) * inv_sigma_i2) * sfac
        ys = np.arange(0, h - dy, dtype=np.int64)[:, None] * w
        xs = np.arange(x0, x0 + ncols, dtype=np.int64)[None, :]
        rows = (ys + xs).ravel()
        cols = rows + (dy * w + dx)
        rows_parts.append(rows)
        cols_parts.append(cols)
        vals_parts.append(vals.ravel())
    if not rows_parts:
        empty_i = np.empty(0, dtype=np.int64)
        return empty_i, empty_i.copy(), np.empty(0, dtype=np.float64)
    return (
        np.concatenate(rows_parts),
        np.concatenate(cols_parts),
        np.concatenate(vals_parts),
    )
