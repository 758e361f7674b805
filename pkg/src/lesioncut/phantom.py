"""Synthetic ultrasound-style phantoms with known ground truth.

Each phantom is a dark rotated ellipse on a brighter background, edge
softened by a Gaussian blur and corrupted by multiplicative speckle
``pixel * (1 + sigma * n)``. Randomness comes exclusively from NumPy's
PCG64 generator seeded from ``PhantomSpec.seed``, never from global
state, so equal specs produce the same bytes on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import round_half_up

__all__ = ["PhantomSpec", "generate"]


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry, intensities, and noise model of one phantom."""

    width: int
    height: int
    center_x: float
    center_y: float
    semi_axis_a: float
    semi_axis_b: float
    rotation: float
    lesion_intensity: int
    background_intensity: int
    speckle_sigma: float
    blur_sigma: float
    seed: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.semi_axis_a <= 0 or self.semi_axis_b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        if not 0 <= self.lesion_intensity <= 255:
            raise ValueError("lesion_intensity must be in [0, 255]")
        if not 0 <= self.background_intensity <= 255:
            raise ValueError("background_intensity must be in [0, 255]")
        if self.lesion_intensity >= self.background_intensity:
            raise ValueError("lesion must be darker than the background")
        if self.speckle_sigma < 0:
            raise ValueError("speckle_sigma must be nonnegative")
        if self.blur_sigma < 0:
            raise ValueError("blur_sigma must be nonnegative")
        cos_r = np.cos(self.rotation)
        sin_r = np.sin(self.rotation)
        extent_x = np.hypot(self.semi_axis_a * cos_r, self.semi_axis_b * sin_r)
        extent_y = np.hypot(self.semi_axis_a * sin_r, self.semi_axis_b * cos_r)
        if (
            self.center_x - extent_x < 0
            or self.center_x + extent_x > self.width - 1
            or self.center_y - extent_y < 0
            or self.center_y + extent_y > self.height - 1
        ):
            raise ValueError("ellipse extends outside the image bounds")


def _ellipse_mask(spec: PhantomSpec) -> np.ndarray:
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
    dx = xs - spec.center_x
    dy = ys - spec.center_y
    cos_r = np.cos(spec.rotation)
    sin_r = np.sin(spec.rotation)
    u = dx * cos_r + dy * sin_r
    v = -dx * sin_r + dy * cos_r
    return (u / spec.semi_axis_a) ** 2 + (v / spec.semi_axis_b) ** 2 <= 1.0


def generate(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render one phantom, returning (image, ground-truth mask).

    The ground truth is the exact ellipse interior, unaffected by blur
    and noise.
    """
    gt = _ellipse_mask(spec)
    clean = np.where(
        gt, float(spec.lesion_intensity), float(spec.background_intensity)
    )
    if spec.blur_sigma > 0:
        clean = ndimage.gaussian_filter(clean, sigma=spec.blur_sigma)
    if spec.speckle_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        noise = rng.standard_normal(clean.shape)
        clean = clean * (1.0 + spec.speckle_sigma * noise)
    img = round_half_up(np.clip(clean, 0.0, 255.0)).astype(np.uint8)
    return img, gt
