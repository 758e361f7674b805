"""Acceptance gate: each test checks one release criterion and prints a
PASS/FAIL line with the measured numbers, so a bare ``pytest -v`` run
doubles as the sign-off report.

Criterion 6 exercises the full pipeline on speckled phantoms and is a
known red: multiplicative speckle leaves every background segment
non-constant, so clustering always produces a tiny dark candidate whose
area undercuts the true lesion in the minimum-area selection. See the
Known Limitations section of the README.
"""

import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from lesioncut import (
    build_affinity,
    evaluate,
    kmeans_two,
    kmeans_two_steps,
    make_phantom_suite,
    median_filter,
    ncut_value,
    otsu_threshold,
    parse_config,
    render_overlay,
    run_batch,
    run_image,
    second_smallest_generalized_eigvec,
    split_by_eigvec,
    NcutParams,
    AffinityGraph,
)
from scipy import sparse

from .oracles import (
    laplacian_eigpairs,
    mask_counts,
    median_filter_naive,
    metric_fractions,
    min_ncut_exhaustive,
    ncut_brute,
    optimal_two_partition_sse,
    otsu_exhaustive,
    sse_of_labels,
)


def _announce(capsys, num: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num}: {detail}"


def _graph_from_dense(weights: np.ndarray) -> AffinityGraph:
    w = sparse.csr_matrix(weights)
    return AffinityGraph(weights=w, degrees=np.asarray(w.sum(axis=1)).ravel())


def test_criterion_1_metrics_match_counting_oracle(capsys):
    rng = np.random.default_rng(101)
    elapsed = 0.0
    worst_gap = 0.0
    exact = True
    for _ in range(1000):
        pred = rng.uniform(size=(16, 16)) < rng.uniform(0.1, 0.9)
        gt = rng.uniform(size=(16, 16)) < rng.uniform(0.1, 0.9)
        if not gt.any():
            gt[rng.integers(16), rng.integers(16)] = True
        started = time.perf_counter()
        report = evaluate(pred, gt)
        elapsed += time.perf_counter() - started
        tp, fp, fn = mask_counts(pred, gt)
        jac, dice, fpr, fnr = metric_fractions(tp, fp, fn)
        exact &= (report.tp, report.fp, report.fn) == (tp, fp, fn)
        exact &= report.jaccard == float(jac)
        exact &= report.dice == float(dice)
        exact &= report.fpr == float(fpr)
        exact &= report.fnr == float(fnr)
        identity = abs(report.dice - 2 * report.jaccard / (1 + report.jaccard))
        worst_gap = max(worst_gap, identity)
    ok = exact and worst_gap <= 1e-12 and elapsed < 5.0
    _announce(
        capsys, 1,
        ok,
        f"1000 mask pairs, exact={exact}, "
        f"max dice-identity gap={worst_gap:.2e}, {elapsed:.2f}s",
    )


def test_criterion_2_otsu_matches_exhaustive(capsys):
    rng = np.random.default_rng(102)
    mismatches = 0
    elapsed = 0.0
    for i in range(200):
        kind = i % 4
        if kind == 0:
            values = rng.integers(0, 256, size=rng.integers(1, 400), dtype=np.uint8)
        elif kind == 1:
            lo = rng.integers(0, 100)
            hi = rng.integers(150, 256)
            values = np.concatenate(
                [
                    np.clip(rng.normal(lo, 8, size=rng.integers(1, 200)), 0, 255),
                    np.clip(rng.normal(hi, 8, size=rng.integers(1, 200)), 0, 255),
                ]
            ).astype(np.uint8)
        elif kind == 2:
            values = np.full(rng.integers(1, 50), rng.integers(0, 256), dtype=np.uint8)
        else:
            base = rng.integers(0, 250)
            values = rng.integers(base, base + 6, size=rng.integers(2, 60)).astype(
                np.uint8
            )
        started = time.perf_counter()
        ours = otsu_threshold(values)
        elapsed += time.perf_counter() - started
        if ours != otsu_exhaustive(values):
            mismatches += 1
    ok = mismatches == 0 and elapsed < 1.0
    _announce(
        capsys, 2, ok,
        f"200 histograms, mismatches={mismatches}, {elapsed:.3f}s",
    )


def test_criterion_3_median_matches_naive_oracle(capsys):
    rng = np.random.default_rng(103)
    mismatches = 0
    elapsed = 0.0
    for _ in range(50):
        img = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
        for window in (3, 7):
            started = time.perf_counter()
            ours = median_filter(img, window)
            elapsed += time.perf_counter() - started
            if not np.array_equal(ours, median_filter_naive(img, window)):
                mismatches += 1
    ok = mismatches == 0 and elapsed < 5.0
    _announce(
        capsys, 3, ok,
        f"50 images x windows 3,7, mismatches={mismatches}, {elapsed:.2f}s",
    )


def test_criterion_4_eigensolver_residual_and_value(capsys):
    rng = np.random.default_rng(104)
    worst_residual_ratio = 0.0
    worst_value_gap = 0.0
    trivial_returns = 0
    elapsed = 0.0
    for _ in range(100):
        h = int(rng.integers(3, 21))
        w = int(rng.integers(3, 21))
        img = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
        graph = build_affinity(img, NcutParams(radius=2.5, sigma_intensity=0.2))
        started = time.perf_counter()
        x, lam = second_smallest_generalized_eigvec(graph, tol=1e-6)
        elapsed += time.perf_counter() - started
        d = graph.degrees
        residual = float(np.abs((d * x - graph.weights @ x) - lam * d * x).max())
        worst_residual_ratio = max(
            worst_residual_ratio, residual / float(np.abs(x).max())
        )
        spectrum = laplacian_eigpairs(graph.weights.toarray())
        worst_value_gap = max(worst_value_gap, abs(lam - float(spectrum[1])))
        # the deflated mode is the constant vector; measure D-alignment
        alignment = abs(float(d @ x)) / (np.linalg.norm(d) * np.linalg.norm(x))
        if alignment > 1e-6:
            trivial_returns += 1
    ok = (
        worst_residual_ratio <= 1e-6
        and worst_value_gap <= 1e-6
        and trivial_returns == 0
        and elapsed < 30.0
    )
    _announce(
        capsys, 4, ok,
        f"100 graphs n<=400, max residual ratio={worst_residual_ratio:.2e}, "
        f"max eigenvalue gap={worst_value_gap:.2e}, "
        f"trivial returns={trivial_returns}, {elapsed:.2f}s",
    )


def test_criterion_5_ncut_value_and_planted_recovery(capsys):
    rng = np.random.default_rng(105)
    elapsed = 0.0

    worst_gap = 0.0
    for _ in range(50):
        w = rng.uniform(size=(8, 8))
        w = 0.5 * (w + w.T)
        np.fill_diagonal(w, 1.0)
        graph = _graph_from_dense(w)
        part = rng.uniform(size=8) < 0.5
        if not part.any() or part.all():
            part[0] = True
            part[1] = False
        started = time.perf_counter()
        ours = ncut_value(graph, part)
        elapsed += time.perf_counter() - started
        worst_gap = max(worst_gap, abs(ours - ncut_brute(w, part)))

    recovered = 0
    for _ in range(20):
        w = np.zeros((10, 10))
        w[:5, :5] = rng.uniform(0.5, 1.0, size=(5, 5))
        w[5:, 5:] = rng.uniform(0.5, 1.0, size=(5, 5))
        w = 0.5 * (w + w.T)
        np.fill_diagonal(w, 1.0)
        a = int(rng.integers(0, 5))
        b = int(rng.integers(5, 10))
        w[a, b] = w[b, a] = 0.01
        graph = _graph_from_dense(w)
        started = time.perf_counter()
        eigvec, _ = second_smallest_generalized_eigvec(graph)
        partition, score = split_by_eigvec(graph, eigvec, 32)
        elapsed += time.perf_counter() - started
        best_val, best_part = min_ncut_exhaustive(w)
        if not partition[0]:
            partition = ~partition
        if np.array_equal(partition, best_part) and abs(score - best_val) <= 1e-9:
            recovered += 1
    ok = worst_gap <= 1e-9 and recovered == 20 and elapsed < 10.0
    _announce(
        capsys, 5, ok,
        f"max ncut gap={worst_gap:.2e}, planted recovery {recovered}/20, "
        f"{elapsed:.2f}s",
    )


def test_criterion_6_phantom_suite_end_to_end(capsys, tmp_path):
    config_path = make_phantom_suite(20, seed=1006, out_dir=tmp_path / "suite")
    config = parse_config(config_path)
    dices = []
    seconds = []
    for entry in config.entries:
        started = time.perf_counter()
        try:
            _, report = run_image(entry, config)
            dices.append(report.dice)
        except Exception:  # noqa: BLE001 - a crash counts as a failed image
            dices.append(0.0)
        seconds.append(time.perf_counter() - started)
    dices = np.array(dices)
    successes = dices[dices >= 0.40]
    mean_success = float(successes.mean()) if successes.size else 0.0
    slowest = max(seconds)
    ok = successes.size >= 16 and mean_success >= 0.70 and slowest < 30.0
    _announce(
        capsys, 6, ok,
        f"20 phantoms, {successes.size}/20 with dice>=0.40, "
        f"mean dice over successes={mean_success:.3f}, "
        f"median dice={float(np.median(dices)):.3f}, "
        f"slowest image {slowest:.1f}s",
    )


def test_criterion_7_kmeans_optimal_on_seeded_sets(capsys):
    rng = np.random.default_rng(107)
    elapsed = 0.0
    separable = True
    monotone = True
    optimal = True
    for i in range(500):
        kind = i % 10
        if kind < 7:
            # two-mode sets: the clustering step's operating regime
            gap_lo = rng.uniform(0, 80)
            gap_hi = rng.uniform(gap_lo + 80, 255)
            n_lo = int(rng.integers(1, 8))
            n_hi = int(rng.integers(1, 8))
            values = np.concatenate(
                [
                    rng.uniform(gap_lo, gap_lo + 15, size=n_lo),
                    rng.uniform(gap_hi - 15, gap_hi, size=n_hi),
                ]
            )
            rng.shuffle(values)
        elif kind < 9:
            values = np.full(int(rng.integers(1, 10)), rng.uniform(0, 255))
        else:
            values = rng.uniform(0, 255, size=2)
        started = time.perf_counter()
        steps = list(kmeans_two_steps(values))
        elapsed += time.perf_counter() - started
        labels = steps[-1][0]
        if labels.max() == 1:
            separable &= values[labels == 0].max() < values[labels == 1].min()
        history = [sse_of_labels(values, lab) for lab, _ in steps]
        monotone &= all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
        best = optimal_two_partition_sse(values)
        optimal &= sse_of_labels(values, labels) <= best * (1 + 1e-12) + 1e-9
    ok = separable and monotone and optimal and elapsed < 5.0
    _announce(
        capsys, 7, ok,
        f"500 value sets, separable={separable}, sse monotone={monotone}, "
        f"optimal={optimal}, {elapsed:.2f}s",
    )


def test_criterion_8_overlay_counts_match_metrics(capsys):
    rng = np.random.default_rng(108)
    exact = True
    for _ in range(100):
        pred = rng.uniform(size=(14, 14)) < 0.4
        gt = rng.uniform(size=(14, 14)) < 0.4
        if not gt.any():
            gt[0, 0] = True
        background = rng.integers(0, 250, size=(14, 14), dtype=np.uint8)
        overlay = render_overlay(pred, gt, background)
        report = evaluate(pred, gt)
        white = int((overlay == (255, 255, 255)).all(axis=2).sum())
        green = int((overlay == (0, 255, 0)).all(axis=2).sum())
        red = int((overlay == (255, 0, 0)).all(axis=2).sum())
        exact &= (white, green, red) == (report.tp, report.fp, report.fn)
    _announce(capsys, 8, exact, "100 mask pairs, color counts exact")


def test_criterion_9_batch_runs_are_byte_identical(capsys, tmp_path):
    config_path = make_phantom_suite(2, seed=1009, out_dir=tmp_path / "suite")
    config = replace(parse_config(config_path), timing=False)

    def snapshot() -> dict[str, bytes]:
        run_batch(config)
        return {
            p.name: p.read_bytes()
            for p in sorted(config.output_dir.iterdir())
        }

    first = snapshot()
    second = snapshot()
    identical = first.keys() == second.keys() and all(
        first[name] == second[name] for name in first
    )
    names = ", ".join(sorted(first))
    _announce(
        capsys, 9, identical,
        f"2 runs x {len(first)} artifacts ({names}) byte-compared",
    )
