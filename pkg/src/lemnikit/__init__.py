"""Numerical checks of the logarithmic-derivative bound on polynomial
lemniscate components free of critical points."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    CorollaryCheck,
    InverseBranchPath,
    SamplingPlan,
    Verdict,
    continue_inverse_branch,
    eligible_limit,
    verify_corollary,
    verify_inverse_bound,
    verify_theorem,
)
from .capacity import (
    Box,
    CapacityEstimate,
    CondenserSpec,
    Disk,
    Exterior,
    HalfPlane,
    LogPolar,
    Ray,
    Segment,
    StripComplement,
    asymptotic_cap_C,
    asymptotic_cap_strip,
    c_r_spec,
    capacity,
    puncture_convergence,
    slit_capacity,
    solve_potential,
    strip_map,
)
from .errors import *  # noqa: F401,F403
from .level import LevelCurve, argument_increment, monotonicity_sweep, seed_on_level, trace_level_curve
from .poly import (
    CriticalKind,
    CriticalPoint,
    Polynomial,
    RootSet,
    bound_value,
    critical_points,
    evaluate,
    find_roots,
    polar_derivative,
    proper_critical_points,
)
from .topology import Component, MergeTree, build_merge_tree, components_at_level, descent_flow, locate_point
