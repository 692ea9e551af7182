"""Rotationally symmetric graphical mean curvature flow with a sliding
boundary on a support surface of revolution: simulation of the pinch-off and
classification of the curvature blow-up rate."""

from ._backend import backend_name, get_backend, set_backend
from .analysis import (
    BoundVerdict,
    FitParts,
    SingularityReport,
    SingularityType,
    check_bounds,
    classify,
    estimate_T,
    fit_exponent,
    not_type0_check,
)
from .geometry import (
    CurvatureField,
    SlopeBound,
    boundary_gradient_bound,
    boundary_height_velocity,
    curvature,
    neumann_slope,
    radius_velocity,
)
from .oracle import (
    SphereSolution,
    pde_residual,
    sphere_derivatives,
    sphere_state,
    synthetic_trajectory,
)
from .profiles import (
    CheckVerdict,
    ProfileCurve,
    Type0Certificate,
    Type1Certificate,
    Type2Certificate,
    REGISTRY,
    check_pinching_cylinder,
    default_certificates,
    eval_profile,
    get_profile,
    graph_floor,
    verify_type0,
    verify_type1,
    verify_type2,
)
from .solver import (
    GraphState,
    SolverConfig,
    StopReason,
    Trajectory,
    adapt_dt,
    make_initial_cap,
    rescaled_rhs,
    run,
    state_residuals,
    step,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BoundVerdict", "CheckVerdict", "CurvatureField", "FitParts",
    "GraphState", "ProfileCurve", "REGISTRY", "SingularityReport",
    "SingularityType", "SlopeBound", "SolverConfig", "SphereSolution",
    "StopReason", "Trajectory", "Type0Certificate", "Type1Certificate",
    "Type2Certificate", "adapt_dt", "backend_name", "boundary_gradient_bound",
    "boundary_height_velocity", "check_bounds", "check_pinching_cylinder",
    "classify", "curvature", "default_certificates", "errors", "estimate_T",
    "eval_profile", "fit_exponent", "get_backend", "get_profile",
    "graph_floor", "make_initial_cap", "neumann_slope", "not_type0_check",
    "pde_residual", "radius_velocity", "rescaled_rhs", "run", "set_backend",
    "sphere_derivatives", "sphere_state", "state_residuals", "step",
    "synthetic_trajectory", "verify_type0", "verify_type1", "verify_type2",
]
