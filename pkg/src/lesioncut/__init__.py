"""Lesion segmentation for speckled grayscale images.

The pipeline despeckles with a median filter, optionally adjusts
contrast, partitions the image by recursive normalized cuts, extracts
the lesion as the smallest dark minimum-contour region across segments,
and scores predictions against ground-truth masks.
"""

from .config import RunConfig, RunEntry, parse_config, write_config
from .errors import (
    ConfigParseError,
    ConvergenceFailureError,
    CorruptImageError,
    EmptyBatchError,
    EmptyGroundTruthError,
    EmptyReportListError,
    EmptySideError,
    GeometryMismatchError,
    InvalidWindowError,
    LesionCutError,
    NoValidSplitError,
    UnsupportedFormatError,
    ZeroAssociationError,
)
from .metrics import (
    AggregateReport,
    EvalReport,
    MetricSummary,
    aggregate,
    evaluate,
    render_overlay,
)
from .phantom import PhantomSpec, generate
from .postprocess import (
    LesionResult,
    Region,
    classify_segment,
    connected_components,
    kmeans_two,
    kmeans_two_steps,
    otsu_threshold,
    select_lesion,
    select_min_contour,
)
from .preprocess import (
    PreprocessOptions,
    binarize_fixed,
    histogram_equalize,
    intensity_adjust,
    median_filter,
    preprocess,
)
from .raster import load_grayscale, rescale_to_255, round_half_up, save_image
from .spectral import (
    AffinityGraph,
    NcutParams,
    SegmentLabels,
    build_affinity,
    extract_segment_images,
    ncut_value,
    second_smallest_generalized_eigvec,
    segment,
    split_by_eigvec,
)
from .cli import main, make_phantom_suite, run_batch, run_image

__version__ = "0.1.0"
