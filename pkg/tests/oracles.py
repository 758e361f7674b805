"""Independent reference implementations used to verify the package.

Everything here is deliberately written the slow, obvious way (pure
Python loops, exact rational arithmetic, dense linear algebra) and
shares no code with the package internals.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def median_filter_naive(img: np.ndarray, window: int) -> np.ndarray:
    """Per-pixel gather, zero pad, sort, pick the middle element."""
    h, w = img.shape
    r = window // 2
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            samples = []
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w:
                        samples.append(int(img[yy, xx]))
                    else:
                        samples.append(0)
            samples.sort()
            out[y, x] = samples[len(samples) // 2]
    return out


def affinity_dense(
    img: np.ndarray, sigma_i: float, sigma_s: float, radius: float
) -> np.ndarray:
    """Dense affinity matrix via a double loop over pixel pairs."""
    h, w = img.shape
    n = h * w
    field = img.astype(np.float64) / 255.0
    out = np.zeros((n, n))
    for i in range(n):
        yi, xi = divmod(i, w)
        for j in range(n):
            yj, xj = divmod(j, w)
            dist2 = (yi - yj) ** 2 + (xi - xj) ** 2
            if dist2 >= radius * radius:
                continue
            df = field[yi, xi] - field[yj, xj]
            out[i, j] = math.exp(-(df * df) / sigma_i**2) * math.exp(
                -dist2 / sigma_s**2
            )
    return out


def ncut_brute(weights: np.ndarray, partition: np.ndarray) -> float:
    """Double-loop cut and association sums."""
    n = weights.shape[0]
    degrees = weights.sum(axis=1)
    cut = 0.0
    for i in range(n):
        for j in range(n):
            if partition[i] and not partition[j]:
                cut += weights[i, j]
    assoc_a = float(degrees[partition].sum())
    assoc_b = float(degrees[~partition].sum())
    return cut * (1.0 / assoc_a + 1.0 / assoc_b)


def min_ncut_exhaustive(weights: np.ndarray) -> tuple[float, np.ndarray]:
    """Exhaustive minimum over all bipartitions (node 0 fixed to side A)."""
    n = weights.shape[0]
    best_val = math.inf
    best_part = None
    for bits in range(2 ** (n - 1)):
        partition = np.zeros(n, dtype=bool)
        partition[0] = True
        for k in range(n - 1):
            if (bits >> k) & 1:
                partition[k + 1] = True
        if partition.all():
            continue
        val = ncut_brute(weights, partition)
        if val < best_val:
            best_val = val
            best_part = partition
    return best_val, best_part


def laplacian_eigpairs(weights: np.ndarray) -> np.ndarray:
    """All eigenvalues of the symmetrized generalized problem, ascending."""
    degrees = weights.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = np.eye(weights.shape[0]) - inv_sqrt[:, None] * weights * inv_sqrt[None, :]
    lap = 0.5 * (lap + lap.T)
    return np.linalg.eigvalsh(lap)


def otsu_exhaustive(values: np.ndarray) -> int:
    """Scan all 256 thresholds maximizing exact between-class variance."""
    hist = np.bincount(np.asarray(values, dtype=np.uint8).ravel(), minlength=256)
    occupied = np.nonzero(hist)[0]
    if occupied.size == 1:
        return int(occupied[0])
    total_n = int(hist.sum())
    total_s = int((np.arange(256) * hist).sum())
    best_t = -1
    best_score = Fraction(-1)
    for t in range(256):
        n0 = int(hist[: t + 1].sum())
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s0 = int((np.arange(t + 1) * hist[: t + 1]).sum())
        s1 = total_s - s0
        mu0 = Fraction(s0, n0)
        mu1 = Fraction(s1, n1)
        score = Fraction(n0, total_n) * Fraction(n1, total_n) * (mu0 - mu1) ** 2
        if score > best_score:
            best_score = score
            best_t = t
    return best_t


def sse_of_labels(values: np.ndarray, labels: np.ndarray) -> float:
    """Within-cluster sum of squares with centroids at cluster means."""
    total = 0.0
    for lab in (0, 1):
        members = values[labels == lab]
        if members.size:
            total += float(((members - members.mean()) ** 2).sum())
    return total


def optimal_two_partition_sse(values: np.ndarray) -> float:
    """Best SSE over every threshold split of the sorted values.

    The optimal 1-D 2-means partition is always a prefix/suffix split of
    the sorted sequence, so scanning all n-1 splits (plus the
    single-cluster option) is exhaustive.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    best = float(((v - v.mean()) ** 2).sum())
    for cut in range(1, v.size):
        left = v[:cut]
        right = v[cut:]
        sse = float(((left - left.mean()) ** 2).sum())
        sse += float(((right - right.mean()) ** 2).sum())
        best = min(best, sse)
    return best


def mask_counts(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int, int]:
    """tp, fp, fn via explicit per-pixel loops."""
    tp = fp = fn = 0
    for p, g in zip(pred.ravel().tolist(), gt.ravel().tolist()):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif g and not p:
            fn += 1
    return tp, fp, fn


def metric_fractions(
    tp: int, fp: int, fn: int
) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """jaccard, dice, fpr, fnr as exact rationals."""
    jaccard = Fraction(tp, tp + fp + fn)
    dice = Fraction(2 * tp, 2 * tp + fp + fn)
    fpr = Fraction(fp, tp + fn)
    fnr = Fraction(fn, tp + fn)
    return jaccard, dice, fpr, fnr
