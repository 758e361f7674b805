"""Normalized-cuts segmentation.

Builds a sparse pixel-affinity graph over a working-resolution image,
solves the generalized eigenproblem (D - W) x = lambda D x for the
second-smallest eigenpair, thresholds that eigenvector at the best of a
fixed grid of splitting points, and recurses largest-region-first until
the target region count is reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from . import _kernels
from .errors import (
    ConvergenceFailureError,
    EmptySideError,
    GeometryMismatchError,
    NoValidSplitError,
    ZeroAssociationError,
)

__all__ = [
    "AffinityGraph",
    "NcutParams",
    "SegmentLabels",
    "build_affinity",
    "extract_segment_images",
    "ncut_value",
    "second_smallest_generalized_eigvec",
    "segment",
    "split_by_eigvec",
]

# Above this node count the dense symmetric eigensolver is replaced by
# shift-invert Lanczos iteration.
_DENSE_MAX_NODES = 2000

# The trivial eigenpair (lambda=0, D^{1/2} ones) is shifted up by this
# constant; any value above the lambda_max <= 2 bound of the normalized
# Laplacian works.
_DEFLATION_SHIFT = 3.0

_ARPACK_SEED = 12345
_ARPACK_MAXITER = 5000


@dataclass(frozen=True)
class NcutParams:
    """Tuning constants for affinity construction and recursive cutting.

    ``sigma_intensity`` is a fraction of the 0-1 normalized intensity
    range; ``sigma_spatial`` and ``radius`` are in working-resolution
    pixels. Recursion stops at ``num_regions`` or earlier when no region
    can be split; a candidate split whose normalized-cut value exceeds
    ``ncut_recursion_threshold`` is rejected.
    """

    sigma_intensity: float = 0.1
    sigma_spatial: float = 4.0
    radius: float = 5.0
    num_regions: int = 4
    working_max_side: int = 160
    eig_tol: float = 1e-6
    num_split_points: int = 32
    ncut_recursion_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.sigma_intensity <= 0 or self.sigma_spatial <= 0:
            raise ValueError("affinity scales must be positive")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.num_regions < 2:
            raise ValueError(f"num_regions must be >= 2, got {self.num_regions}")
        if self.num_split_points < 2:
            raise ValueError(
                f"num_split_points must be >= 2, got {self.num_split_points}"
            )
        if self.working_max_side < 1:
            raise ValueError("working_max_side must be >= 1")
        if self.eig_tol <= 0:
            raise ValueError("eig_tol must be positive")
        if self.ncut_recursion_threshold <= 0:
            raise ValueError("ncut_recursion_threshold must be positive")


@dataclass(frozen=True)
class AffinityGraph:
    """Sparse symmetric pixel-similarity matrix with its degree vector."""

    weights: sparse.csr_matrix
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class SegmentLabels:
    """Per-pixel region ids 0..k-1 at full input resolution."""

    width: int
    height: int
    labels: np.ndarray = field(repr=False)
    k: int


def _unit_field(img: np.ndarray) -> np.ndarray:
    """Map an image to float intensities in [0, 1]."""
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a nonempty 2-D image")
    if img.dtype == np.bool_:
        return img.astype(np.float64)
    if img.dtype == np.uint8:
        return img.astype(np.float64) / 255.0
    field_ = img.astype(np.float64)
    if field_.min() < 0.0 or field_.max() > 255.0:
        raise ValueError("float image values must lie in [0, 255]")
    return field_ / 255.0


def _affinity_from_field(field_: np.ndarray, params: NcutParams) -> AffinityGraph:
    h, w = field_.shape
    n = h * w
    rows, cols, vals = _kernels.affinity_entries(
        field_,
        params.radius,
        1.0 / params.sigma_intensity**2,
        1.0 / params.sigma_spatial**2,
    )
    diag = np.arange(n, dtype=np.int64)
    all_rows = np.concatenate([rows, cols, diag])
    all_cols = np.concatenate([cols, rows, diag])
    all_vals = np.concatenate([vals, vals, np.ones(n)])
    weights = sparse.coo_matrix((all_vals, (all_rows, all_cols)), shape=(n, n)).tocsr()
    degrees = np.asarray(weights.sum(axis=1)).ravel()
    return AffinityGraph(weights=weights, degrees=degrees)


def build_affinity(img: np.ndarray, params: NcutParams) -> AffinityGraph:
    """Construct the pixel-affinity graph of a working-resolution image.

    For pixel pairs closer than ``params.radius`` the weight is the
    product of an intensity Gaussian and a spatial Gaussian,
    ``exp(-(F_i-F_j)^2/sigma_intensity^2) * exp(-d^2/sigma_spatial^2)``
    with intensities normalized to [0, 1]; other pairs have weight 0 and
    the diagonal is 1.
    """
    return _affinity_from_field(_unit_field(img), params)


def ncut_value(graph: AffinityGraph, partition: np.ndarray) -> float:
    """Normalized-cut value cut(A,B) * (1/assoc(A,V) + 1/assoc(B,V)).

    ``partition`` is a boolean vector over nodes; True marks side A.
    """
    part = np.asarray(partition, dtype=bool).ravel()
    if part.size != graph.n:
        raise GeometryMismatchError(
            f"partition length {part.size} != node count {graph.n}"
        )
    if not part.any() or part.all():
        raise EmptySideError("both partition sides must be nonempty")
    assoc_a = float(graph.degrees[part].sum())
    assoc_b = float(graph.degrees[~part].sum())
    if assoc_a <= 0.0 or assoc_b <= 0.0:
        raise ZeroAssociationError("a partition side has zero total degree")
    cut = float(graph.weights[part][:, ~part].sum())
    return cut * (1.0 / assoc_a + 1.0 / assoc_b)


def _normalized_laplacian(graph: AffinityGraph) -> tuple[sparse.csr_matrix, np.ndarray]:
    """I - D^{-1/2} W D^{-1/2} together with the unit vector D^{1/2} 1."""
    d = graph.degrees
    inv_sqrt = 1.0 / np.sqrt(d)
    scaling = sparse.diags(inv_sqrt)
    lap = sparse.identity(graph.n, format="csr") - scaling @ graph.weights @ scaling
    t = np.sqrt(d)
    t /= np.linalg.norm(t)
    return lap.tocsr(), t


def _fix_sign(x: np.ndarray) -> np.ndarray:
    scale = np.abs(x).max()
    nonzero = np.nonzero(np.abs(x) > 1e-12 * scale)[0]
    if nonzero.size and x[nonzero[0]] < 0:
        return -x
    return x


def second_smallest_generalized_eigvec(
    graph: AffinityGraph, tol: float = 1e-6
) -> tuple[np.ndarray, float]:
    """Second-smallest eigenpair of (D - W) x = lambda D x.

    The problem is symmetrized to the normalized Laplacian
    ``L = I - D^{-1/2} W D^{-1/2}`` and the known trivial eigenpair
    (lambda=0, D^{1/2} ones) is deflated by a rank-one shift, so the
    smallest remaining eigenvalue is the wanted one. Small systems use a
    dense solver; large ones use shift-invert Lanczos with a fixed start
    vector for reproducibility.

    Returns the eigenvector (unit Euclidean norm, first nonzero
    component positive) and its eigenvalue. Raises
    ``ConvergenceFailureError`` when the residual bound
    ``max|.(D-W)x - lambda D x| <= tol * max|x|`` cannot be met.
    """
    n = graph.n
    if n < 2:
        raise ValueError("eigenproblem needs at least 2 nodes")
    if np.any(graph.degrees <= 0):
        raise ZeroAssociationError("all node degrees must be positive")
    lap, t = _normalized_laplacian(graph)
    budget = 1
    if n <= _DENSE_MAX_NODES:
        dense = lap.toarray()
        dense += _DEFLATION_SHIFT * np.outer(t, t)
        dense = 0.5 * (dense + dense.T)
        vals, vecs = eigh(dense, subset_by_index=[0, 0])
        lam = float(vals[0])
        y = vecs[:, 0]
    else:
        budget = _ARPACK_MAXITER
        shifted = (lap + 0.01 * sparse.identity(n, format="csr")).tocsc()
        lu = splu(shifted, permc_spec="MMD_AT_PLUS_A")
        u = lu.solve(t)
        denom = 1.0 + _DEFLATION_SHIFT * float(t @ u)

        def op_inv(x: np.ndarray) -> np.ndarray:
            z = lu.solve(x)
            return z - (_DEFLATION_SHIFT * float(t @ z) / denom) * u

        def op_fwd(x: np.ndarray) -> np.ndarray:
            return lap @ x + _DEFLATION_SHIFT * float(t @ x) * t

        deflated = LinearOperator((n, n), matvec=op_fwd, dtype=np.float64)
        inv = LinearOperator((n, n), matvec=op_inv, dtype=np.float64)
        v0 = np.random.default_rng(_ARPACK_SEED).standard_normal(n)
        try:
            vals, vecs = eigsh(
                deflated,
                k=1,
                sigma=-0.01,
                which="LM",
                OPinv=inv,
                v0=v0,
                tol=1e-10,
                maxiter=_ARPACK_MAXITER,
            )
        except ArpackNoConvergence as exc:
            raise ConvergenceFailureError(_ARPACK_MAXITER, float("inf")) from exc
        lam = float(vals[0])
        y = vecs[:, 0]
    x = y / np.sqrt(graph.degrees)
    x /= np.linalg.norm(x)
    x = _fix_sign(x)
    dx = graph.degrees * x
    residual = float(np.abs((dx - graph.weights @ x) - lam * dx).max())
    if residual > tol * float(np.abs(x).max()):
        raise ConvergenceFailureError(budget, residual)
    return x, lam


def split_by_eigvec(
    graph: AffinityGraph, eigvec: np.ndarray, num_split_points: int
) -> tuple[np.ndarray, float]:
    """Best bipartition of the graph by thresholding an eigenvector.

    Tries ``num_split_points`` evenly spaced thresholds strictly between
    the eigenvector's min and max; each candidate partition is
    ``eigvec > t``. Returns the partition with the smallest
    normalized-cut value (ties go to the smaller threshold) and that
    value. Candidates leaving a side empty or with zero association are
    skipped; if all are, ``NoValidSplitError`` is raised.
    """
    v = np.asarray(eigvec, dtype=np.float64).ravel()
    if v.size != graph.n:
        raise GeometryMismatchError(f"eigvec length {v.size} != node count {graph.n}")
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        raise NoValidSplitError("eigenvector is constant")
    npts = int(num_split_points)
    thresholds = lo + (hi - lo) * np.arange(1, npts + 1) / (npts + 1)

    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    cum_deg = np.cumsum(graph.degrees[order])
    total_deg = float(cum_deg[-1])

    upper = sparse.triu(graph.weights, k=1).tocoo()
    edge_lo = np.minimum(v[upper.row], v[upper.col])
    edge_hi = np.maximum(v[upper.row], v[upper.col])
    first = np.searchsorted(thresholds, edge_lo, side="left")
    last = np.searchsorted(thresholds, edge_hi, side="left")
    cut_delta = np.zeros(npts + 1)
    np.add.at(cut_delta, first, upper.data)
    np.add.at(cut_delta, last, -upper.data)
    cuts = np.cumsum(cut_delta)[:npts]

    low_count = np.searchsorted(sorted_v, thresholds, side="right")
    valid = (low_count > 0) & (low_count < graph.n)
    assoc_low = np.where(valid, cum_deg[np.minimum(low_count, graph.n) - 1], np.nan)
    assoc_high = total_deg - assoc_low
    valid &= (assoc_low > 0) & (assoc_high > 0)
    if not valid.any():
        raise NoValidSplitError("every candidate threshold is degenerate")
    scores = np.where(valid, cuts * (1.0 / assoc_low + 1.0 / assoc_high), np.inf)
    best = int(np.argmin(scores))
    partition = v > thresholds[best]
    return partition, ncut_value(graph, partition)


def _downsample_weights(n_out: int, n_in: int) -> np.ndarray:
    """Row matrix averaging ``n_in`` samples into ``n_out`` equal bands."""
    weights = np.zeros((n_out, n_in))
    band = n_in / n_out
    for i in range(n_out):
        start = i * band
        end = start + band
        first = int(np.floor(start))
        last = min(n_in, int(np.ceil(end)))
        for j in range(first, last):
            overlap = min(end, j + 1) - max(start, j)
            if overlap > 0:
                weights[i, j] = overlap / band
    return weights


def _area_downsample(img: np.ndarray, max_side: int) -> np.ndarray:
    h, w = img.shape
    longest = max(h, w)
    if longest <= max_side:
        return img
    scale = max_side / longest
    new_h = max(1, int(np.floor(h * scale + 0.5)))
    new_w = max(1, int(np.floor(w * scale + 0.5)))
    row_w = _downsample_weights(new_h, h)
    col_w = _downsample_weights(new_w, w)
    return row_w @ img @ col_w.T


def _nearest_source_index(n_out: int, n_in: int) -> np.ndarray:
    """For each full-resolution index, the working-resolution index."""
    out = np.arange(n_out, dtype=np.int64)
    return (2 * out + 1) * n_in // (2 * n_out)


def segment(img: np.ndarray, params: NcutParams = NcutParams()) -> SegmentLabels:
    """Partition an image into up to ``params.num_regions`` regions.

    The image is area-averaged down so its longer side is at most
    ``params.working_max_side``, an affinity graph is built, and regions
    are recursively bisected largest-first by eigenvector thresholding.
    A region stops splitting when it is smaller than ``2 * radius**2``
    pixels, has a single intensity value (its eigenvector cannot order
    equal-affinity nodes), fails to converge, or admits no split below
    ``ncut_recursion_threshold``. Labels are upsampled back to full
    resolution by nearest neighbor and renumbered by decreasing pixel
    count, so label 0 is always the largest region.
    """
    raw = np.asarray(img)
    if raw.ndim != 2 or raw.size == 0:
        raise ValueError("expected a nonempty 2-D image")
    full_h, full_w = raw.shape
    field_ = _unit_field(raw)
    work = _area_downsample(field_, params.working_max_side)
    work_h, work_w = work.shape
    graph = _affinity_from_field(work, params)
    flat = work.ravel()

    min_pixels = max(2, int(np.ceil(2.0 * params.radius**2)))
    regions: list[np.ndarray] = [np.arange(graph.n, dtype=np.int64)]
    splittable = [True]
    while len(regions) < params.num_regions and any(splittable):
        candidates = [i for i, ok in enumerate(splittable) if ok]
        pick = min(candidates, key=lambda i: (-regions[i].size, int(regions[i][0])))
        idx = regions[pick]
        halves = _try_bisect(graph, flat, idx, min_pixels, params)
        if halves is None:
            splittable[pick] = False
            continue
        regions[pick : pick + 1] = [halves[0], halves[1]]
        splittable[pick : pick + 1] = [True, True]

    work_labels = np.empty(graph.n, dtype=np.int32)
    for rid, idx in enumerate(regions):
        work_labels[idx] = rid
    work_labels = work_labels.reshape(work_h, work_w)

    src_y = _nearest_source_index(full_h, work_h)
    src_x = _nearest_source_index(full_w, work_w)
    full_labels = work_labels[np.ix_(src_y, src_x)]

    counts = np.bincount(full_labels.ravel(), minlength=len(regions))
    new_order = np.argsort(-counts, kind="stable")
    remap = np.empty(len(regions), dtype=np.int32)
    remap[new_order] = np.arange(len(regions), dtype=np.int32)
    full_labels = remap[full_labels]
    return SegmentLabels(
        width=full_w, height=full_h, labels=full_labels, k=len(regions)
    )


def _try_bisect(
    graph: AffinityGraph,
    flat_field: np.ndarray,
    idx: np.ndarray,
    min_pixels: int,
    params: NcutParams,
) -> tuple[np.ndarray, np.ndarray] | None:
    """Bisect one region's subgraph; None when the region cannot split."""
    if idx.size < min_pixels:
        return None
    vals = flat_field[idx]
    if float(vals.max()) == float(vals.min()):
        return None
    sub_w = graph.weights[idx][:, idx].tocsr()
    sub_graph = AffinityGraph(
        weights=sub_w, degrees=np.asarray(sub_w.sum(axis=1)).ravel()
    )
    try:
        eigvec, _ = second_smallest_generalized_eigvec(sub_graph, params.eig_tol)
        partition, cut_score = split_by_eigvec(
            sub_graph, eigvec, params.num_split_points
        )
    except (ConvergenceFailureError, NoValidSplitError):
        return None
    if cut_score > params.ncut_recursion_threshold:
        return None
    return idx[partition], idx[~partition]


def extract_segment_images(
    original: np.ndarray, labels: SegmentLabels
) -> list[np.ndarray]:
    """Render each region as the original image masked to that region."""
    original = np.asarray(original, dtype=np.uint8)
    if original.shape != (labels.height, labels.width):
        raise GeometryMismatchError(
            f"image shape {original.shape} != labels shape "
            f"{(labels.height, labels.width)}"
        )
    return [
        np.where(labels.labels == i, original, 0).astype(np.uint8)
        for i in range(labels.k)
    ]
