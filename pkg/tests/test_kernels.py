"""Backend parity between the compiled kernels and the pure-Python fallback."""

import numpy as np
import pytest

from lesioncut._kernels import (
    affinity_entries,
    backend_name,
    half_plane_offsets,
    median_filter_u8,
)
from .oracles import affinity_dense, median_filter_naive

BACKENDS = ["pure"]
if backend_name() == "native":
    BACKENDS.append("native")


def test_half_plane_offsets_cover_each_pair_once():
    offsets = half_plane_offsets(3.0)
    seen = set(map(tuple, offsets))
    assert (0, 0) not in seen
    for dy, dx in seen:
        assert (-dy, -dx) not in seen
        assert 0 < dy * dy + dx * dx < 9.0
    # every in-range pair appears in exactly one orientation
    for dy in range(-3, 4):
        for dx in range(-3, 4):
            if (dy, dx) == (0, 0):
                continue
            if dy * dy + dx * dx < 9.0:
                assert ((dy, dx) in seen) != ((-dy, -dx) in seen)


def test_half_plane_offsets_radius_is_strict():
    offsets = set(map(tuple, half_plane_offsets(2.0)))
    assert (0, 2) not in offsets
    assert (0, 1) in offsets


@pytest.mark.parametrize("backend", BACKENDS)
class TestMedianBackend:
    def test_matches_oracle(self, backend):
        rng = np.random.default_rng(21)
        for window in (3, 7):
            img = rng.integers(0, 256, size=(25, 31), dtype=np.uint8)
            out = median_filter_u8(img, window, backend=backend)
            np.testing.assert_array_equal(out, median_filter_naive(img, window))

    def test_repeated_values(self, backend):
        img = np.tile(np.array([0, 0, 255, 255], dtype=np.uint8), (6, 3))
        out = median_filter_u8(img, 3, backend=backend)
        np.testing.assert_array_equal(out, median_filter_naive(img, 3))


@pytest.mark.parametrize("backend", BACKENDS)
class TestAffinityBackend:
    def test_matches_dense_oracle(self, backend):
        rng = np.random.default_rng(22)
        img = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
        field = img / 255.0
        rows, cols, vals = affinity_entries(field, 2.5, 1 / 0.1**2, 1 / 4.0**2, backend=backend)
        n = field.size
        dense = np.zeros((n, n))
        dense[rows, cols] = vals
        dense = dense + dense.T
        np.fill_diagonal(dense, 1.0)
        expected = affinity_dense(img, 0.1, 4.0, 2.5)
        np.testing.assert_allclose(dense, expected, rtol=1e-13, atol=0)

    def test_entries_are_upper_half_only(self, backend):
        rng = np.random.default_rng(23)
        field = rng.uniform(size=(5, 5))
        rows, cols, vals = affinity_entries(field, 2.0, 100.0, 0.0625, backend=backend)
        assert (rows < cols).all()
        assert (vals > 0).all() and (vals <= 1).all()


def test_backends_agree_exactly_on_median():
    if backend_name() != "native":
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(24)
    img = rng.integers(0, 256, size=(40, 33), dtype=np.uint8)
    for window in (3, 5, 7, 9):
        a = median_filter_u8(img, window, backend="pure")
        b = median_filter_u8(img, window, backend="native")
        np.testing.assert_array_equal(a, b)


def test_backends_agree_on_affinity():
    if backend_name() != "native":
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(25)
    field = rng.uniform(size=(12, 14))
    pr, pc, pv = affinity_entries(field, 3.0, 1 / 0.01, 1 / 16.0, backend="pure")
    nr, nc, nv = affinity_entries(field, 3.0, 1 / 0.01, 1 / 16.0, backend="native")
    np.testing.assert_array_equal(pr, nr)
    np.testing.assert_array_equal(pc, nc)
    np.testing.assert_allclose(pv, nv, rtol=1e-14, atol=0)
