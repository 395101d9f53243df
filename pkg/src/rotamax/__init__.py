"""Certified consensus maximization for rotation-only perspective-n-lines.

Branch and bound over the rotation-axis sphere with exact one-dimensional
interval stabbing over the rotation angle. Axis sub-regions are scored with
closed-form extreme values of the two spherical components of the residual,
so the upper bound is sound and the search terminates with a certificate.
"""

from .errors import (
    DegenerateAlphaKError,
    DegenerateLineError,
    EmptyDataError,
    RotamaxError,
    SingularIntrinsicsError,
    ZeroLineError,
)
from .geometry import (
    AxisAngle,
    Correspondence,
    PolarCoord,
    SphericalCube,
    UnitVec3,
    cube_contains,
    h1,
    h2,
    pixel_line_to_normal,
    polar_to_unit,
    residual,
    rodrigues,
    rotation_distance,
    unit_to_polar,
)
from .hbounds import HBounds, alpha_star, h1_bounds, h2_bounds, h_bounds
from .intervals import Interval, IntervalSet, StabResult, stab_max
from .oracles import oracle_consensus, oracle_h_extrema, oracle_theta
from .simulate import GroundTruth, SceneConfig, generate_scene, perturb_normal
from .solver import (
    SolveResult,
    SolveStats,
    SolverConfig,
    branch,
    lower_bound,
    solve,
    upper_bound,
)
from .thetaint import feasible_theta_exact, feasible_theta_relaxed, sinusoid_solve

__version__ = "0.1.0"

__all__ = [
    "AxisAngle",
    "Correspondence",
    "DegenerateAlphaKError",
    "DegenerateLineError",
    "EmptyDataError",
    "GroundTruth",
    "HBounds",
    "Interval",
    "IntervalSet",
    "PolarCoord",
    "RotamaxError",
    "SceneConfig",
    "SingularIntrinsicsError",
    "SolveResult",
    "SolveStats",
    "SolverConfig",
    "SphericalCube",
    "StabResult",
    "UnitVec3",
    "ZeroLineError",
    "alpha_star",
    "branch",
    "cube_contains",
    "feasible_theta_exact",
    "feasible_theta_relaxed",
    "generate_scene",
    "h1",
    "h1_bounds",
    "h2",
    "h2_bounds",
    "h_bounds",
    "lower_bound",
    "oracle_consensus",
    "oracle_h_extrema",
    "oracle_theta",
    "perturb_normal",
    "pixel_line_to_normal",
    "polar_to_unit",
    "residual",
    "rodrigues",
    "rotation_distance",
    "sinusoid_solve",
    "solve",
    "stab_max",
    "unit_to_polar",
    "upper_bound",
    "__version__",
]
