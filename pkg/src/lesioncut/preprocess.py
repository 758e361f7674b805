"""Speckle suppression and contrast conditioning ahead of segmentation.

The stage order is fixed: optional intensity adjustment, median filter,
optional histogram equalization, fixed-threshold binarization. Both the
pre-binarization grayscale and the binary mask are returned because
later stages consume both.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidWindowError
from .raster import round_half_up

logger = logging.getLogger(__name__)

__all__ = [
    "PreprocessOptions",
    "binarize_fixed",
    "histogram_equalize",
    "intensity_adjust",
    "median_filter",
    "preprocess",
]


@dataclass(frozen=True)
class PreprocessOptions:
    """Flags and constants controlling the preprocessing stage.

    ``intensity_adjust`` and ``hist_equalize`` are the two per-image
    switches reported in batch CSVs; the remaining fields are pipeline
    constants that rarely change.
    """

    intensity_adjust: bool = False
    hist_equalize: bool = False
    median_window: int = 7
    binarize_threshold: float = 0.2
    feed_binary_to_segmenter: bool = True

    def __post_init__(self) -> None:
        if self.median_window < 3 or self.median_window % 2 == 0:
            raise InvalidWindowError(
                f"median_window must be odd and >= 3, got {self.median_window}"
            )
        if not 0.0 < self.binarize_threshold < 1.0:
            raise ValueError(
                f"binarize_threshold must be in (0, 1), got {self.binarize_threshold}"
            )


def median_filter(img: np.ndarray, window: int = 7) -> np.ndarray:
    """Median of each window*window neighborhood with zero padding.

    Out-of-bounds samples count as 0, so border pixels see a full
    window*window multiset. The window must be odd, making the median an
    element of that multiset.
    """
    if not isinstance(window, (int, np.integer)) or window < 3 or window % 2 == 0:
        raise InvalidWindowError(f"window must be an odd integer >= 3, got {window}")
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a nonempty 2-D grayscale image")
    return _kernels.median_filter_u8(img, window)


def intensity_adjust(img: np.ndarray, saturate_frac: float = 0.01) -> np.ndarray:
    """Saturate a fraction of pixels at each tail, then stretch to [0, 255].

    The bounds are order statistics of the sorted pixel multiset: with
    ``k = floor(saturate_frac * N)``, ``lo`` is the (k+1)-th smallest
    value and ``hi`` the (k+1)-th largest, so exactly the k most extreme
    pixels on each side are clipped. When lo == hi the constant-image
    rescale rule applies and the output is all zeros.
    """
    if not 0.0 <= saturate_frac < 0.5:
        raise ValueError(f"saturate_frac must be in [0, 0.5), got {saturate_frac}")
    img = np.asarray(img, dtype=np.uint8)
    flat = np.sort(img, axis=None)
    n = flat.size
    k = int(np.floor(saturate_frac * n))
    lo = float(flat[k])
    hi = float(flat[n - 1 - k])
    if hi == lo:
        return np.zeros(img.shape, dtype=np.uint8)
    clipped = np.clip(img.astype(np.float64), lo, hi)
    out = round_half_up(255.0 * (clipped - lo) / (hi - lo))
    return out.astype(np.uint8)


def histogram_equalize(img: np.ndarray) -> np.ndarray:
    """Standard 256-bin cumulative-histogram equalization.

    out(v) = round(255 * (cdf(v) - cdf_min) / (N - cdf_min)) with
    ``cdf_min`` the smallest nonzero cumulative count. Constant images
    are returned unchanged.
    """
    img = np.asarray(img, dtype=np.uint8)
    n = img.size
    if n == 0:
        raise ValueError("expected a nonempty image")
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = int(cdf[np.argmax(hist > 0)])
    if cdf_min == n:
        return img.copy()
    lut = round_half_up(255.0 * (cdf - cdf_min) / (n - cdf_min))
    return np.clip(lut, 0, 255).astype(np.uint8)[img]


def binarize_fixed(img: np.ndarray, threshold: float = 0.2) -> np.ndarray:
    """Pixel -> True iff intensity/255 is strictly greater than threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    img = np.asarray(img, dtype=np.uint8)
    return img.astype(np.float64) / 255.0 > threshold


def preprocess(
    img: np.ndarray, opts: PreprocessOptions = PreprocessOptions()
) -> tuple[np.ndarray, np.ndarray]:
    """Run the full preprocessing chain on one grayscale image.

    Returns the despeckled (and optionally equalized) grayscale along
    with its binarization.
    """
    work = np.asarray(img, dtype=np.uint8)
    if opts.intensity_adjust:
        work = intensity_adjust(work)
        logger.debug("intensity adjustment applied")
    work = median_filter(work, opts.median_window)
    logger.debug("median filter applied (window %d)", opts.median_window)
    if opts.hist_equalize:
        work = histogram_equalize(work)
        logger.debug("histogram equalization applied")
    binary = binarize_fixed(work, opts.binarize_threshold)
    return work, binary
