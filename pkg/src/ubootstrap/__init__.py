"""Two-dimensional bootstrap percolation with general update families.

Exact classification of update families via stable-direction geometry,
closure dynamics on finite lattices, Monte Carlo estimation of critical
probabilities, and barrier/triangular-cover constructions with a
lower-bound certificate calculator.
"""

from ubootstrap.geometry import (
    Arc,
    ArcSet,
    Classification,
    Direction,
    InvalidOverride,
    NoValidTriple,
    NotSubcritical,
    UpdateFamily,
    UpdateRule,
    WitnessTriple,
    classify,
    destabilized_arc,
    forbidden_set,
    interaction_range,
    is_symmetric,
    stable_set,
    witness_triple,
)
from ubootstrap.dynamics import (
    FreeHealthy,
    GridConfig,
    HalfPlane,
    Stability,
    StepReport,
    Torus,
    UnknownFamily,
    WindowTooSmall,
    builtin_family,
    closure,
    half_plane_probe,
    percolates,
    step,
)
from ubootstrap.montecarlo import (
    EstimateResult,
    TrialOutcome,
    TrialPlan,
    estimate_pc,
    estimate_theta,
    result_csv,
    sample,
    uniform_field,
)
from ubootstrap.covers import (
    Barrier,
    BadFractionReport,
    Certificate,
    CoverLayout,
    DemoReport,
    EpsilonTooLarge,
    NestingViolation,
    NoCleanSite,
    ParameterOrderViolation,
    RegionNotAligned,
    RenormParams,
    SiteMask,
    SlopeViolation,
    TilingHierarchy,
    TilingLevel,
    TriangularCover,
    WaypointNotFound,
    bad_fraction_check,
    build_barrier,
    build_cover,
    build_hierarchy,
    certificate_text,
    certify,
    cover_demo,
    cover_layout,
    find_clean_site,
    validate_barrier,
    verify_closed,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "ArcSet",
    "BadFractionReport",
    "Barrier",
    "Certificate",
    "Classification",
    "CoverLayout",
    "DemoReport",
    "Direction",
    "EpsilonTooLarge",
    "EstimateResult",
    "FreeHealthy",
    "GridConfig",
    "HalfPlane",
    "InvalidOverride",
    "NestingViolation",
    "NoCleanSite",
    "NotSubcritical",
    "NoValidTriple",
    "ParameterOrderViolation",
    "RegionNotAligned",
    "RenormParams",
    "SiteMask",
    "SlopeViolation",
    "Stability",
    "StepReport",
    "TilingHierarchy",
    "TilingLevel",
    "Torus",
    "TrialOutcome",
    "TrialPlan",
    "TriangularCover",
    "UnknownFamily",
    "UpdateFamily",
    "UpdateRule",
    "WaypointNotFound",
    "WindowTooSmall",
    "WitnessTriple",
    "bad_fraction_check",
    "build_barrier",
    "build_cover",
    "build_hierarchy",
    "builtin_family",
    "certificate_text",
    "certify",
    "classify",
    "closure",
    "cover_demo",
    "cover_layout",
    "destabilized_arc",
    "estimate_pc",
    "estimate_theta",
    "find_clean_site",
    "forbidden_set",
    "half_plane_probe",
    "interaction_range",
    "is_symmetric",
    "percolates",
    "result_csv",
    "sample",
    "stable_set",
    "step",
    "uniform_field",
    "validate_barrier",
    "verify_closed",
    "witness_triple",
]
