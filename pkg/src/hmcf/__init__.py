"""Level-set active contours driven by hyperbolic (wave-type) mean curvature flow."""

__version__ = "0.1.0"

from .engine import (  # noqa: E402
    MODELS,
    BenchParams,
    RegularizationParams,
    RunConfig,
    SegmentationResult,
    convergence_check,
    segment,
    segment_multiphase,
    segment_pmcf_baseline,
)
from .estimators import HMCFSegmenter, MultiphaseSegmenter, PMCFSegmenter  # noqa: E402
from .exceptions import (  # noqa: E402
    ConfigError,
    ContourVanishedError,
    DegenerateRegionError,
    FormatError,
    HMCFError,
    InvalidParameterError,
    StabilityError,
)
from .fields import Grid2D, LevelSetState, curvature, make_circle_sdf, reinitialize_sdf  # noqa: E402
from .metrics import dice, modified_hausdorff  # noqa: E402
from .velocity import ModelParams  # noqa: E402
from .wave import WaveParams, WaveState, evolve_wave, nine_point_laplacian  # noqa: E402

__all__ = [
    "MODELS",
    "BenchParams",
    "ConfigError",
    "ContourVanishedError",
    "DegenerateRegionError",
    "FormatError",
    "Grid2D",
    "HMCFError",
    "HMCFSegmenter",
    "InvalidParameterError",
    "LevelSetState",
    "ModelParams",
    "MultiphaseSegmenter",
    "PMCFSegmenter",
    "RegularizationParams",
    "RunConfig",
    "SegmentationResult",
    "StabilityError",
    "WaveParams",
    "WaveState",
    "__version__",
    "convergence_check",
    "curvature",
    "dice",
    "evolve_wave",
    "make_circle_sdf",
    "modified_hausdorff",
    "nine_point_laplacian",
    "reinitialize_sdf",
    "segment",
    "segment_multiphase",
    "segment_pmcf_baseline",
]
