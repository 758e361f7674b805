"""Pixelwise evaluation against ground truth and aggregate statistics.

FPR follows the ground-truth normalization FP/|GT| (not the classical
FP/negatives), so values above 1 are legitimate for predictions much
larger than the lesion; FNR = FN/|GT| is bounded by 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import EmptyGroundTruthError, EmptyReportListError, GeometryMismatchError

__all__ = [
    "AggregateReport",
    "EvalReport",
    "MetricSummary",
    "aggregate",
    "evaluate",
    "render_overlay",
]

_OVERLAY_TP = (255, 255, 255)
_OVERLAY_FP = (0, 255, 0)
_OVERLAY_FN = (255, 0, 0)


@dataclass(frozen=True)
class EvalReport:
    """Per-image segmentation quality measures."""

    jaccard: float
    dice: float
    fpr: float
    fnr: float
    tp: int
    fp: int
    fn: int
    seconds: float = 0.0


@dataclass(frozen=True)
class MetricSummary:
    """One statistic (mean or stddev) per reported metric column."""

    jaccard: float
    dice: float
    fpr: float
    fnr: float
    seconds: float


@dataclass(frozen=True)
class AggregateReport:
    """Batch-level roll-up; statistics are recomputed from the rows."""

    reports: tuple[EvalReport, ...]
    mean: MetricSummary
    stddev: MetricSummary


def _as_mask(arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != np.bool_:
        raise TypeError(f"{name} must be a boolean mask, got dtype {arr.dtype}")
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim {arr.ndim}")
    return arr


def evaluate(pred: np.ndarray, gt: np.ndarray) -> EvalReport:
    """Jaccard, Dice, FPR, FNR and raw counts of one prediction.

    The ground truth must contain at least one positive pixel; callers
    fill ``seconds`` themselves since timing is not this function's
    concern.
    """
    pred = _as_mask(pred, "pred")
    gt = _as_mask(gt, "gt")
    if pred.shape != gt.shape:
        raise GeometryMismatchError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    if not gt.any():
        raise EmptyGroundTruthError("ground-truth mask has no positive pixels")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    gt_area = tp + fn
    return EvalReport(
        jaccard=tp / (tp + fp + fn),
        dice=2 * tp / (2 * tp + fp + fn),
        fpr=fp / gt_area,
        fnr=fn / gt_area,
        tp=tp,
        fp=fp,
        fn=fn,
    )


def render_overlay(
    pred: np.ndarray, gt: np.ndarray, background: np.ndarray
) -> np.ndarray:
    """RGB overlay: TP white, FP green, FN red, rest grayscale background."""
    pred = _as_mask(pred, "pred")
    gt = _as_mask(gt, "gt")
    background = np.asarray(background, dtype=np.uint8)
    if pred.shape != gt.shape or background.shape != pred.shape:
        raise GeometryMismatchError(
            f"shape mismatch: pred {pred.shape}, gt {gt.shape}, "
            f"background {background.shape}"
        )
    out = np.repeat(background[:, :, None], 3, axis=2)
    out[pred & gt] = _OVERLAY_TP
    out[pred & ~gt] = _OVERLAY_FP
    out[~pred & gt] = _OVERLAY_FN
    return out


def aggregate(reports: list[EvalReport] | tuple[EvalReport, ...]) -> AggregateReport:
    """Mean and sample standard deviation per metric column.

    Uses the n-1 denominator; a single report has stddev 0 in every
    column by convention.
    """
    rows = tuple(reports)
    if not rows:
        raise EmptyReportListError("cannot aggregate zero reports")
    columns = [f.name for f in fields(MetricSummary)]
    means = {}
    devs = {}
    n = len(rows)
    for col in columns:
        vals = [getattr(r, col) for r in rows]
        mean = sum(vals) / n
        means[col] = mean
        if n == 1:
            devs[col] = 0.0
        else:
            devs[col] = math.sqrt(sum((v - mean) ** 2 for v in vals) / (n - 1))
    return AggregateReport(
        reports=rows, mean=MetricSummary(**means), stddev=MetricSummary(**devs)
    )
