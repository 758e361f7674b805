"""Backend dispatch for the two hot kernels.

``median_filter_u8`` and ``affinity_entries`` exist twice: a compiled
Cython extension (``_native``) and a vectorized NumPy/SciPy fallback
(``pure``). The extension is used when it was built; setting
``LESIONCUT_BACKEND=pure`` or ``=native`` overrides the choice. Both
backends implement identical contracts and are cross-checked in the
test suite.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import pure

try:
    from . import _native
except ImportError:
    _native = None

__all__ = [
    "affinity_entries",
    "backend_name",
    "half_plane_offsets",
    "median_filter_u8",
]


def _select_backend():
    requested = os.environ.get("LESIONCUT_BACKEND", "").strip().lower()
    if requested == "pure":
        return pure, "pure"
    if requested == "native":
        if _native is None:
            raise RuntimeError(
                "LESIONCUT_BACKEND=native but the compiled extension is "
                "not available; reinstall with Cython and a C compiler"
            )
        return _native, "native"
    if requested:
        raise RuntimeError(f"unknown LESIONCUT_BACKEND value: {requested!r}")
    if _native is not None:
        return _native, "native"
    return pure, "pure"


_impl, _impl_name = _select_backend()


def backend_name() -> str:
    """Name of the active kernel backend, ``"native"`` or ``"pure"``."""
    return _impl_name


def half_plane_offsets(radius: float) -> list[tuple[int, int]]:
    """Pixel offsets (dy, dx) with 0 < dy^2+dx^2 < radius^2, one per pair.

    Only the half plane dy > 0 or (dy == 0 and dx > 0) is listed, so each
    unordered pixel pair appears exactly once; callers mirror the entries
    to obtain the symmetric matrix.
    """
    reach = int(math.ceil(radius))
    offsets = []
    for dy in range(0, reach + 1):
        for dx in range(-reach, reach + 1):
            if dy == 0 and dx <= 0:
                continue
            if dy * dy + dx * dx < radius * radius:
                offsets.append((dy, dx))
    return offsets


def median_filter_u8(img: np.ndarray, window: int, *, backend=None) -> np.ndarray:
    """Median filter with zero padding on a 2-D uint8 image.

    Out-of-bounds samples count as intensity 0, so every output pixel is
    the exact median of window*window values.
    """
    img = np.ascontiguousarray(img, dtype=np.uint8)
    impl = _impl if backend is None else (_native if backend == "native" else pure)
    if impl is None:
        raise RuntimeError("native backend requested but not built")
    return impl.median_filter_u8(img, int(window))


def affinity_entries(
    field: np.ndarray,
    radius: float,
    inv_sigma_i2: float,
    inv_sigma_s2: float,
    *,
    backend=None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Upper-half affinity entries for a normalized intensity field.

    For each pixel pair (i, j) closer than ``radius`` (strict Euclidean
    distance, i < j in the half-plane enumeration) the weight is
    ``exp(-(F_i-F_j)^2 * inv_sigma_i2) * exp(-dist^2 * inv_sigma_s2)``.
    Returns ``(rows, cols, vals)`` without the diagonal; both backends
    emit entries in the same offset-major, row-major order.
    """
    field = np.ascontiguousarray(field, dtype=np.float64)
    if field.ndim != 2 or field.size == 0:
        raise ValueError("field must be a nonempty 2-D array")
    offsets = half_plane_offsets(radius)
    dys = np.array([o[0] for o in offsets], dtype=np.int64)
    dxs = np.array([o[1] for o in offsets], dtype=np.int64)
    sfac = np.exp(-(dys.astype(np.float64) ** 2 + dxs.astype(np.float64) ** 2) * inv_sigma_s2)
    impl = _impl if backend is None else (_native if backend == "native" else pure)
    if impl is None:
        raise RuntimeError("native backend requested but not built")
    return impl.affinity_entries(field, dys, dxs, sfac, float(inv_sigma_i2))
