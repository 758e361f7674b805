"""Image representation and I/O.

Images are plain NumPy arrays throughout the package:

* grayscale image: 2-D ``uint8`` array, row-major,
* binary mask: 2-D ``bool`` array,
* RGB image: ``(h, w, 3)`` ``uint8`` array.

Intermediate processing happens in floating point; quantization back to
8 bits always rounds half up via :func:`round_half_up`.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, UnsupportedFormatError

__all__ = [
    "load_grayscale",
    "rescale_to_255",
    "round_half_up",
    "save_image",
]

_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def round_half_up(values: np.ndarray | float) -> np.ndarray | float:
    """Round to the nearest integer with halves going up (2.5 -> 3).

    NumPy's own rounding is round-half-to-even, which is the wrong rule
    here; every fractional-to-integer pixel conversion in the package
    goes through this function instead.
    """
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def _require_grayscale(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise TypeError(f"expected 2-D uint8 image, got {img.dtype} ndim={img.ndim}")
    if img.size == 0:
        raise ValueError("image has no pixels")
    return img


def load_grayscale(path: str | os.PathLike) -> np.ndarray:
    """Load an 8-bit PNG or binary PGM file as a 2-D uint8 array.

    RGB inputs are converted to luma with the BT.601 weights
    (0.299, 0.587, 0.114), rounded half up. Pillow's own ``convert("L")``
    truncates instead of rounding, so the conversion is done explicitly.

    Raises
    ------
    FileNotFoundError
        if ``path`` does not exist.
    CorruptImageError
        if the file exists but cannot be decoded.
    UnsupportedFormatError
        for formats other than 8-bit grayscale/RGB PNG or 8-bit PGM.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            fmt = im.format
            mode = im.mode
            if fmt == "PNG" and mode in ("L", "RGB"):
                data = np.asarray(im)
            elif fmt == "PPM" and mode == "L":
                data = np.asarray(im)
            else:
                raise UnsupportedFormatError(
                    f"{path}: unsupported image (format={fmt}, mode={mode}); "
                    "expected 8-bit grayscale/RGB PNG or binary PGM"
                )
    except UnsupportedFormatError:
        raise
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"{path}: not a decodable image") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{path}: failed to decode: {exc}") from exc
    if data.ndim == 3:
        r, g, b = (data[:, :, i].astype(np.float64) for i in range(3))
        wr, wg, wb = _LUMA_WEIGHTS
        data = round_half_up(wr * r + wg * g + wb * b)
    return data.astype(np.uint8)


def save_image(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write a grayscale image, binary mask, or RGB image as PNG.

    Boolean masks are stored with 0 -> 0 and 1 -> 255 so that the output
    is viewable; grayscale round-trips pixel-exact through
    :func:`load_grayscale`.
    """
    img = np.asarray(img)
    if img.ndim == 2 and img.dtype == np.bool_:
        out = Image.fromarray(img.astype(np.uint8) * 255, mode="L")
    elif img.ndim == 2 and img.dtype == np.uint8:
        out = Image.fromarray(img, mode="L")
    elif img.ndim == 3 and img.shape[2] == 3 and img.dtype == np.uint8:
        out = Image.fromarray(img, mode="RGB")
    else:
        raise TypeError(
            f"cannot save array with dtype={img.dtype} shape={img.shape}; "
            "expected uint8 gray, bool mask, or uint8 RGB"
        )
    out.save(os.fspath(path), format="PNG")


def rescale_to_255(img: np.ndarray) -> np.ndarray:
    """Linearly map the value range of ``img`` onto [0, 255].

    The minimum maps to 0 and the maximum to 255, rounding half up.
    A constant input maps to all zeros rather than raising; downstream
    stages treat such segments through their single-value fallbacks.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.size == 0:
        raise ValueError("cannot rescale an empty raster")
    lo = float(img.min())
    hi = float(img.max())
    if hi == lo:
        return np.zeros(img.shape, dtype=np.uint8)
    scaled = round_half_up(255.0 * (img - lo) / (hi - lo))
    return scaled.astype(np.uint8)
