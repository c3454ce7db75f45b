"""liftopt: minimization by lifting to one extra dimension.

A cost f on R^N becomes a set in R^{N+1} (its epigraph); minimizing f is
then a matter of alternating orthogonal projections between that set and
the half-space of heights below a floor value. A second solver swaps the
epigraph projection for projections onto supporting hyperplanes built from
subgradients, which extends to constrained problems and, experimentally,
to cusp-shaped non-convex costs.
"""

from .costs import (
    FirFilter,
    build_cost,
    make_affine,
    make_entropic,
    make_filtered_variation,
    make_l1,
    make_l2_norm,
    make_l2_squared,
    make_lp,
    make_total_variation,
    with_offset,
)
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    DomainError,
    NumericalError,
    SpecFileError,
    SubgradientUnavailableError,
    UnsupportedOperationError,
)
from .oracles import (
    finite_difference_subgradient_check,
    golden_section,
    grid_oracle,
    projection_oracle,
)
from .projections import (
    AffineHyperplane,
    Box,
    Halfspace,
    Hyperplane,
    L2Ball,
    make_constraint,
    project_constraint,
    project_epigraph,
    project_hyperplane,
    project_level_set,
    supporting_hyperplane_at,
)
from .solvers import (
    fallback_two_hyperplanes,
    solve_constrained,
    solve_nonconvex,
    solve_pocs_epigraph,
    solve_supporting_hyperplane,
)
from .types import (
    CostFunction,
    EpigraphSet,
    IterationRecord,
    LevelSet,
    LiftedVector,
    SolveResult,
    SolverConfig,
    Termination,
    membership,
)

__version__ = "0.1.0"

__all__ = [
    "LiftedVector", "CostFunction", "LevelSet", "EpigraphSet", "SolverConfig",
    "SolveResult", "IterationRecord", "Termination", "membership",
    "FirFilter", "make_l1", "make_l2_squared", "make_total_variation",
    "make_filtered_variation", "make_entropic", "make_lp", "make_affine",
    "make_l2_norm", "with_offset", "build_cost",
    "Hyperplane", "project_level_set", "project_hyperplane",
    "supporting_hyperplane_at", "project_epigraph", "Box", "L2Ball",
    "Halfspace", "AffineHyperplane", "make_constraint", "project_constraint",
    "solve_pocs_epigraph", "solve_supporting_hyperplane",
    "fallback_two_hyperplanes", "solve_constrained", "solve_nonconvex",
    "grid_oracle", "projection_oracle", "finite_difference_subgradient_check",
    "golden_section",
    "DimensionMismatchError", "DomainError", "SubgradientUnavailableError",
    "ConfigurationError", "NumericalError", "UnsupportedOperationError",
    "SpecFileError",
]
