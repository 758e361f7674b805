"""Lesion extraction from segmented images.

Each segment image is range-normalized and split into a dark and a
bright cluster by two-centroid k-means (with an Otsu fallback for
single-valued segments); the region with the shortest exterior contour
survives per segment, and the smallest surviving region across all
segments is reported as the lesion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy import ndimage

from .errors import GeometryMismatchError
from .raster import rescale_to_255
from .spectral import SegmentLabels, extract_segment_images

__all__ = [
    "LesionResult",
    "Region",
    "classify_segment",
    "connected_components",
    "kmeans_two",
    "kmeans_two_steps",
    "otsu_threshold",
    "select_lesion",
    "select_min_contour",
]

_KMEANS_MAX_ITER = 100

# Moore neighborhood in clockwise order starting from west (image
# coordinates, y increasing downward).
_TRACE_DIRS = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_DIR_INDEX = {d: i for i, d in enumerate(_TRACE_DIRS)}


@dataclass(frozen=True)
class Region:
    """One 8-connected component of a binary mask."""

    indices: np.ndarray = field(repr=False)
    area: int
    boundary: np.ndarray = field(repr=False)
    boundary_length: int


@dataclass(frozen=True)
class LesionResult:
    """Final lesion mask with provenance flags.

    ``source_segment`` is -1 and ``is_empty`` True when every segment
    produced an empty candidate.
    """

    mask: np.ndarray = field(repr=False)
    source_segment: int
    area: int
    fallback_used: bool
    is_empty: bool


def kmeans_two_steps(
    values: np.ndarray,
) -> Iterator[tuple[np.ndarray, tuple[float, float]]]:
    """Yield (labels, centroids) after each assignment of 2-means.

    Lloyd's algorithm with centroids initialized at the minimum and
    maximum of the values; distance ties assign to the low cluster.
    Iteration stops when assignments repeat or after 100 rounds. Exposed
    separately from :func:`kmeans_two` so convergence behavior can be
    inspected.
    """
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise ValueError("cannot cluster an empty value set")
    lo = float(vals.min())
    hi = float(vals.max())
    if lo == hi:
        yield np.zeros(vals.size, dtype=np.uint8), (lo, hi)
        return
    c_low, c_high = lo, hi
    prev: np.ndarray | None = None
    for _ in range(_KMEANS_MAX_ITER):
        high = np.abs(vals - c_high) < np.abs(vals - c_low)
        labels = high.astype(np.uint8)
        if np.any(high):
            c_high = float(vals[high].mean())
        if not np.all(high):
            c_low = float(vals[~high].mean())
        if c_low > c_high:
            labels = 1 - labels
            c_low, c_high = c_high, c_low
        yield labels, (c_low, c_high)
        if prev is not None and np.array_equal(labels, prev):
            return
        prev = labels


def kmeans_two(values: np.ndarray) -> np.ndarray:
    """Cluster 1-D values into labels {0, 1} with 0 the low cluster.

    A single-valued input yields all zeros.
    """
    labels = None
    for labels, _ in kmeans_two_steps(values):
        pass
    assert labels is not None
    return labels


def otsu_threshold(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance over a 256-bin histogram.

    Ties are broken toward the smallest threshold and a constant input
    returns its own value (so thresholding with strict ``> t`` yields an
    empty mask). The argmax is computed in exact integer arithmetic:
    omega0*omega1*(mu0-mu1)^2 is compared via the cross-multiplied form
    (s1*n0 - s0*n1)^2 * (m0*m1) to avoid float ties.
    """
    arr = np.asarray(img, dtype=np.uint8).ravel()
    if arr.size == 0:
        raise ValueError("cannot threshold an empty image")
    hist = np.bincount(arr, minlength=256).astype(np.int64)
    occupied = np.nonzero(hist)[0]
    if occupied.size == 1:
        return int(occupied[0])
    counts = [int(c) for c in hist]
    sums = [int(v) * counts[v] for v in range(256)]
    total_n = sum(counts)
    total_s = sum(sums)
    best_t = -1
    best_num = -1
    best_den = 1
    n0 = 0
    s0 = 0
    for t in range(256):
        n0 += counts[t]
        s0 += sums[t]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_s - s0
        num = (s1 * n0 - s0 * n1) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t = t
            best_num = num
            best_den = den
    return best_t


def _pad_component(mask: np.ndarray) -> np.ndarray:
    padded = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    return padded


def _trace_boundary(mask: np.ndarray) -> list[tuple[int, int]]:
    """Moore-neighbor boundary trace of a single 8-connected component.

    Walks the exterior contour clockwise from the topmost-leftmost pixel
    and stops when the first directed step (start to its successor)
    repeats, which closes the cycle even for pinched shapes where the
    start pixel is visited more than once.
    """
    ys, xs = np.nonzero(mask)
    start = (int(ys[0]), int(xs[0]))
    if ys.size == 1:
        return [start]
    padded = _pad_component(mask)
    p = (start[0] + 1, start[1] + 1)
    back = (p[0], p[1] - 1)
    trace = [p]
    first_step: tuple[tuple[int, int], tuple[int, int]] | None = None
    limit = 8 * ys.size + 16
    for _ in range(limit):
        d = _DIR_INDEX[(back[0] - p[0], back[1] - p[1])]
        nxt = None
        for k in range(1, 9):
            dy, dx = _TRACE_DIRS[(d + k) % 8]
            cell = (p[0] + dy, p[1] + dx)
            if padded[cell]:
                nxt = cell
                break
        assert nxt is not None, "area >= 2 component must have a filled neighbor"
        if first_step is None:
            first_step = (p, nxt)
        elif (p, nxt) == first_step:
            break
        trace.append(nxt)
        back = p
        p = nxt
    else:
        raise RuntimeError("boundary trace failed to close")
    if len(trace) > 1 and trace[-1] == trace[0]:
        trace.pop()
    return [(y - 1, x - 1) for y, x in trace]


def connected_components(mask: np.ndarray) -> list[Region]:
    """8-connected components of a mask with traced exterior boundaries.

    ``boundary_length`` counts distinct boundary pixels; the stored
    boundary sequence may revisit pixels on one-pixel-wide necks.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("expected a 2-D mask")
    labeled, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    regions: list[Region] = []
    w = mask.shape[1]
    for rid, sl in enumerate(ndimage.find_objects(labeled), start=1):
        sub = labeled[sl] == rid
        ys, xs = np.nonzero(sub)
        y0, x0 = sl[0].start, sl[1].start
        indices = ((ys + y0) * w + (xs + x0)).astype(np.int64)
        local = _trace_boundary(sub)
        boundary = np.array(
            [(y + y0) * w + (x + x0) for y, x in local], dtype=np.int64
        )
        regions.append(
            Region(
                indices=indices,
                area=int(indices.size),
                boundary=boundary,
                boundary_length=int(np.unique(boundary).size),
            )
        )
    assert len(regions) == count
    return regions


def select_min_contour(mask: np.ndarray) -> np.ndarray:
    """Keep only the region with the shortest exterior contour.

    Empty masks and single-region masks pass through unchanged; with two
    or more regions the smallest boundary_length wins, ties broken by
    smaller area and then by first pixel position.
    """
    mask = np.asarray(mask, dtype=bool)
    regions = connected_components(mask)
    if len(regions) <= 1:
        return mask.copy()
    best = min(
        regions, key=lambda r: (r.boundary_length, r.area, int(r.indices[0]))
    )
    out = np.zeros(mask.shape, dtype=bool)
    out.ravel()[best.indices] = True
    return out


def _classify_with_flag(
    segimg: np.ndarray, polarity: str
) -> tuple[np.ndarray, bool]:
    if polarity not in ("dark", "bright"):
        raise ValueError(f"polarity must be 'dark' or 'bright', got {polarity!r}")
    segimg = np.asarray(segimg, dtype=np.uint8)
    support = segimg > 0
    out = np.zeros(segimg.shape, dtype=bool)
    if not support.any():
        return out, False
    vals = rescale_to_255(segimg)[support]
    if int(vals.min()) == int(vals.max()):
        t = otsu_threshold(vals)
        chosen = vals < t if polarity == "dark" else vals > t
        out[support] = chosen
        return out, True
    labels = kmeans_two(vals)
    wanted = 0 if polarity == "dark" else 1
    out[support] = labels == wanted
    return out, False


def classify_segment(segimg: np.ndarray, *, polarity: str = "dark") -> np.ndarray:
    """Binary lesion-candidate mask for one segment image.

    The segment's nonzero footprint is range-normalized to [0, 255] and
    clustered into two intensity groups; the mask keeps the low group
    (or the high group under ``polarity="bright"``). Single-valued
    footprints fall back to Otsu thresholding, whose strict-inequality
    side is empty there, so such segments yield no candidate. Pixels
    outside the footprint are never selected.
    """
    mask, _ = _classify_with_flag(segimg, polarity)
    return mask


def select_lesion(
    original: np.ndarray, labels: SegmentLabels, *, polarity: str = "dark"
) -> LesionResult:
    """Pick the lesion mask among all segment candidates.

    Each segment is classified and reduced to its minimum-contour
    region; among the nonempty candidates the one with the smallest area
    wins, ties going to the lower segment index.
    """
    segments = extract_segment_images(original, labels)
    best: tuple[int, int] | None = None
    best_mask: np.ndarray | None = None
    best_fallback = False
    for i, seg in enumerate(segments):
        cand_mask, fallback = _classify_with_flag(seg, polarity)
        cand = select_min_contour(cand_mask)
        area = int(np.count_nonzero(cand))
        if area == 0:
            continue
        key = (area, i)
        if best is None or key < best:
            best = key
            best_mask = cand
            best_fallback = fallback
    if best is None:
        return LesionResult(
            mask=np.zeros((labels.height, labels.width), dtype=bool),
            source_segment=-1,
            area=0,
            fallback_used=False,
            is_empty=True,
        )
    return LesionResult(
        mask=best_mask,
        source_segment=best[1],
        area=best[0],
        fallback_used=best_fallback,
        is_empty=False,
    )
