"""Rectangle packing via truncated moment systems.

Reduces "do these rectangles tile this box" to a finite polynomial system
over placement corners, solves it numerically with deterministic multistart
Levenberg-Marquardt, and keeps the numerics honest with an independent
geometric verifier (float and exact-rational modes), a signed
corner-cancellation test, an exhaustive oracle for small integer instances,
and the classical weighted-centroid identities of the harmonic rectangle
family.
"""

from .harmonic import (
    IdentityEval,
    IdentityId,
    identity_partial,
    rhs_consistency,
    rhs_constant,
    rhs_derive,
)
from .instances import (
    AreaVerdict,
    BoxSpec,
    Instance,
    Layout,
    Placement,
    RectSpec,
    check_area,
    gen_guillotine,
    harmonic_prefix,
    parse_instance,
    parse_layout,
    serialize_instance,
    serialize_layout,
    squared_rectangle_32x33,
)
from .moments import (
    FIXED,
    ROTATABLE,
    MomentSystem,
    ResidualVector,
    build_system,
    default_max_order,
    jacobian,
    layout_to_vars,
    residual,
    vars_to_layout,
)
from .oracle import GridState, enumerate_small_family, oracle_feasible
from .solver import (
    SolveConfig,
    SolveReport,
    init_shelf_greedy,
    snap_layout,
    solve_multistart,
    solve_single,
)
from .verify import (
    VerificationReport,
    corner_cancellation,
    moment_residual_of_layout,
    verify_exact,
    verify_layout,
)

__version__ = "0.1.0"

__all__ = [
    "AreaVerdict",
    "BoxSpec",
    "FIXED",
    "GridState",
    "IdentityEval",
    "IdentityId",
    "Instance",
    "Layout",
    "MomentSystem",
    "Placement",
    "RectSpec",
    "ResidualVector",
    "ROTATABLE",
    "SolveConfig",
    "SolveReport",
    "VerificationReport",
    "build_system",
    "check_area",
    "corner_cancellation",
    "default_max_order",
    "enumerate_small_family",
    "gen_guillotine",
    "harmonic_prefix",
    "identity_partial",
    "init_shelf_greedy",
    "jacobian",
    "layout_to_vars",
    "moment_residual_of_layout",
    "oracle_feasible",
    "parse_instance",
    "parse_layout",
    "residual",
    "rhs_consistency",
    "rhs_constant",
    "rhs_derive",
    "serialize_instance",
    "serialize_layout",
    "snap_layout",
    "solve_multistart",
    "solve_single",
    "squared_rectangle_32x33",
    "vars_to_layout",
    "verify_exact",
    "verify_layout",
]
