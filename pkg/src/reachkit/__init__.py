"""Reach estimation for point clouds via convexity defect functions."""

from .defect import (
    DefectConfig,
    DefectProfile,
    PairContribution,
    defect_at,
    defect_bruteforce,
    defect_profile,
    first_diagonal_touch,
    profile_from_csv,
    profile_to_csv,
)
from .errors import ConfigError, InputError
from .estimators import (
    ModelParams,
    ReachEstimate,
    estimate_epsilon,
    local_reach,
    reach,
    rmax_from_density,
    wfs,
)
from .geometry import (
    Ball,
    PointCloud,
    SpatialIndex,
    dist,
    hausdorff,
    hausdorff_asym,
    min_enclosing_ball,
    nearest_dist,
    segment_farthest,
)
from .synth import (
    BumpSphere,
    Circle,
    Dumbbell,
    GroundTruth,
    Sphere,
    Torus,
    TwoSegmentBottleneck,
    bump_profile,
    dense_reference,
    ground_truth,
    load_cloud_csv,
    perturb_bump,
    sample,
    save_cloud_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BumpSphere",
    "Circle",
    "ConfigError",
    "DefectConfig",
    "DefectProfile",
    "Dumbbell",
    "GroundTruth",
    "InputError",
    "ModelParams",
    "PairContribution",
    "PointCloud",
    "ReachEstimate",
    "SpatialIndex",
    "Sphere",
    "Torus",
    "TwoSegmentBottleneck",
    "bump_profile",
    "defect_at",
    "defect_bruteforce",
    "defect_profile",
    "dense_reference",
    "dist",
    "estimate_epsilon",
    "first_diagonal_touch",
    "ground_truth",
    "hausdorff",
    "hausdorff_asym",
    "load_cloud_csv",
    "local_reach",
    "min_enclosing_ball",
    "nearest_dist",
    "perturb_bump",
    "profile_from_csv",
    "profile_to_csv",
    "reach",
    "rmax_from_density",
    "sample",
    "save_cloud_csv",
    "segment_farthest",
    "wfs",
]
