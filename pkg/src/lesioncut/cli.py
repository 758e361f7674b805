"""Batch driver and command-line interface.

Verbs:

* ``run <config>``: execute every entry of a run configuration, writing
  predictions, overlays, and a CSV report.
* ``eval <pred.png> <gt.png>``: score one mask pair.
* ``phantom --count N --seed S --out DIR``: generate a ready-to-run
  synthetic suite.
* ``segment <image.png> [--adjust] [--histeq] [--out DIR]``: run the
  pipeline on a single image without ground truth.

Exit codes: 0 full success, 1 any per-image failure, 2 configuration or
argument error. Set ``LESIONCUT_LOG`` (DEBUG/INFO/WARNING/...) for log
verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig, RunEntry, parse_config, write_config
from .errors import ConfigParseError, EmptyBatchError, LesionCutError
from .metrics import AggregateReport, EvalReport, aggregate, evaluate, render_overlay
from .phantom import PhantomSpec, generate
from .postprocess import LesionResult, select_lesion
from .preprocess import PreprocessOptions, preprocess
from .raster import load_grayscale, rescale_to_255, save_image
from .spectral import NcutParams, segment

logger = logging.getLogger(__name__)

__all__ = ["main", "make_phantom_suite", "run_batch", "run_image"]

_CSV_HEADER = "image,adjust,histeq,jaccard,dice,fpr,fnr,seconds,status"

_PHANTOM_SIZE = 256
_PHANTOM_AXIS_RANGE = (25.0, 55.0)
_PHANTOM_LESION = 40
_PHANTOM_BACKGROUND = 180
_PHANTOM_SPECKLE = 0.25
_PHANTOM_BLUR = 1.5


@dataclass(frozen=True)
class _Row:
    """One CSV line: either a scored entry or a recorded failure."""

    entry: RunEntry
    report: EvalReport | None
    status: str


def run_image(
    entry: RunEntry, config: RunConfig
) -> tuple[LesionResult, EvalReport]:
    """Run the full pipeline on one entry and write its artifacts.

    The reported seconds cover preprocessing through evaluation; image
    loading and artifact writing are excluded. With ``config.timing``
    off the time is reported as 0.0 so reports stay byte-reproducible.
    """
    img = load_grayscale(entry.image)
    gt = load_grayscale(entry.gt) > 0

    started = time.perf_counter()
    filtered, binary = preprocess(img, entry.options)
    seg_input = binary if entry.options.feed_binary_to_segmenter else filtered
    labels = segment(seg_input, config.ncut)
    lesion = select_lesion(filtered, labels, polarity=config.lesion_polarity)
    report = evaluate(lesion.mask, gt)
    elapsed = time.perf_counter() - started

    report = replace(report, seconds=elapsed if config.timing else 0.0)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    save_image(lesion.mask, config.output_dir / f"{entry.name}_mask.png")
    if config.overlay:
        overlay = render_overlay(lesion.mask, gt, filtered)
        save_image(overlay, config.output_dir / f"{entry.name}_overlay.png")
    logger.info(
        "%s: jaccard=%.4f dice=%.4f segments=%d source=%d",
        entry.name,
        report.jaccard,
        report.dice,
        labels.k,
        lesion.source_segment,
    )
    return lesion, report


def _format_row(row: _Row) -> str:
    flags = "{},{}".format(
        "T" if row.entry.options.intensity_adjust else "F",
        "T" if row.entry.options.hist_equalize else "F",
    )
    if row.report is None:
        return f"{row.entry.name},{flags},,,,,,{row.status}"
    r = row.report
    return (
        f"{row.entry.name},{flags},{r.jaccard:.4f},{r.dice:.4f},"
        f"{r.fpr:.4f},{r.fnr:.4f},{r.seconds:.4f},{row.status}"
    )


def _summary_line(name: str, summary) -> str:
    return (
        f"{name},,,{summary.jaccard:.4f},{summary.dice:.4f},"
        f"{summary.fpr:.4f},{summary.fnr:.4f},{summary.seconds:.4f},"
    )


def run_batch(config: RunConfig) -> AggregateReport | None:
    """Run every entry, write ``report.csv``, and aggregate the results.

    Per-entry failures are recorded in the CSV status column and never
    abort the batch; the mean/stddev rows cover only ok entries. Returns
    None when no entry succeeded (the CSV is still written).
    """
    if not config.entries:
        raise EmptyBatchError("run configuration has no entries")
    rows: list[_Row] = []
    for entry in config.entries:
        try:
            _, report = run_image(entry, config)
            rows.append(_Row(entry=entry, report=report, status="ok"))
        except (LesionCutError, OSError, ValueError, TypeError) as exc:
            logger.warning("%s failed: %s", entry.name, exc)
            rows.append(_Row(entry=entry, report=None, status=type(exc).__name__))

    ok_reports = [row.report for row in rows if row.report is not None]
    logger.info("aggregating %d ok of %d entries", len(ok_reports), len(rows))
    result = aggregate(ok_reports) if ok_reports else None

    lines = [_CSV_HEADER]
    lines += [_format_row(row) for row in rows]
    if result is not None:
        lines.append(_summary_line("mean", result.mean))
        lines.append(_summary_line("stddev", result.stddev))
    config.output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = config.output_dir / "report.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("wrote %s", csv_path)
    return result


def make_phantom_suite(count: int, seed: int, out_dir: str | Path) -> Path:
    """Generate a seeded phantom suite plus a ready-to-run config.

    Ellipse geometry is drawn uniformly within fixed ranges (semi-axes
    25-55 px on a 256 px canvas, free rotation, center placed so the
    ellipse stays inside); intensities and noise follow the standard
    dark-lesion model. Returns the path of the written config file.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))
    entries = []
    for i in range(count):
        name = f"phantom_{i:03d}"
        axis_a = rng.uniform(*_PHANTOM_AXIS_RANGE)
        axis_b = rng.uniform(*_PHANTOM_AXIS_RANGE)
        rotation = rng.uniform(0.0, np.pi)
        extent_x = float(np.hypot(axis_a * np.cos(rotation), axis_b * np.sin(rotation)))
        extent_y = float(np.hypot(axis_a * np.sin(rotation), axis_b * np.cos(rotation)))
        margin = 2.0
        center_x = rng.uniform(extent_x + margin, _PHANTOM_SIZE - 1 - extent_x - margin)
        center_y = rng.uniform(extent_y + margin, _PHANTOM_SIZE - 1 - extent_y - margin)
        child_seed = int(rng.integers(0, 2**63 - 1))
        spec = PhantomSpec(
            width=_PHANTOM_SIZE,
            height=_PHANTOM_SIZE,
            center_x=center_x,
            center_y=center_y,
            semi_axis_a=axis_a,
            semi_axis_b=axis_b,
            rotation=rotation,
            lesion_intensity=_PHANTOM_LESION,
            background_intensity=_PHANTOM_BACKGROUND,
            speckle_sigma=_PHANTOM_SPECKLE,
            blur_sigma=_PHANTOM_BLUR,
            seed=child_seed,
        )
        img, gt = generate(spec)
        save_image(img, out_dir / f"{name}.png")
        save_image(gt, out_dir / f"{name}_gt.png")
        entries.append(
            RunEntry(
                name=name,
                image=out_dir / f"{name}.png",
                gt=out_dir / f"{name}_gt.png",
                options=PreprocessOptions(),
            )
        )
    config = RunConfig(entries=tuple(entries), output_dir=out_dir / "out")
    config_path = out_dir / "suite.ini"
    write_config(config, config_path)
    logger.info("wrote %d phantoms and %s", count, config_path)
    return config_path


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = parse_config(args.config)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_batch(config)
    except EmptyBatchError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    ok = 0 if result is None else len(result.reports)
    if ok < len(config.entries):
        print(
            f"{len(config.entries) - ok} of {len(config.entries)} entries failed",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    try:
        pred = load_grayscale(args.pred) > 0
        gt = load_grayscale(args.gt) > 0
        report = evaluate(pred, gt)
    except (LesionCutError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"jaccard={report.jaccard:.4f} dice={report.dice:.4f} "
        f"fpr={report.fpr:.4f} fnr={report.fnr:.4f}"
    )
    return 0


def _cmd_phantom(args: argparse.Namespace) -> int:
    try:
        config_path = make_phantom_suite(args.count, args.seed, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(config_path)
    return 0


def _cmd_segment(args: argparse.Namespace) -> int:
    try:
        img = load_grayscale(args.image)
        opts = PreprocessOptions(
            intensity_adjust=args.adjust, hist_equalize=args.histeq
        )
        filtered, binary = preprocess(img, opts)
        seg_input = binary if opts.feed_binary_to_segmenter else filtered
        labels = segment(seg_input, NcutParams())
        lesion = select_lesion(filtered, labels)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.image).stem
        save_image(lesion.mask, out_dir / f"{stem}_mask.png")
        save_image(rescale_to_255(labels.labels), out_dir / f"{stem}_labels.png")
    except (LesionCutError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"segments={labels.k} lesion_area={lesion.area} "
        f"source_segment={lesion.source_segment} empty={lesion.is_empty}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lesioncut",
        description="Lesion segmentation via normalized cuts with batch evaluation.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a batch from a config file")
    p_run.add_argument("config", help="path to the run configuration")
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("eval", help="score a prediction against ground truth")
    p_eval.add_argument("pred", help="predicted mask PNG")
    p_eval.add_argument("gt", help="ground-truth mask PNG")
    p_eval.set_defaults(func=_cmd_eval)

    p_phantom = sub.add_parser("phantom", help="generate a synthetic test suite")
    p_phantom.add_argument("--count", type=int, required=True)
    p_phantom.add_argument("--seed", type=int, required=True)
    p_phantom.add_argument("--out", required=True)
    p_phantom.set_defaults(func=_cmd_phantom)

    p_seg = sub.add_parser("segment", help="segment one image without ground truth")
    p_seg.add_argument("image", help="input image (PNG or PGM)")
    p_seg.add_argument("--adjust", action="store_true")
    p_seg.add_argument("--histeq", action="store_true")
    p_seg.add_argument("--out", default=".")
    p_seg.set_defaults(func=_cmd_segment)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("LESIONCUT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
