"""Singular part of the relaxed area of the vortex map graph.

The doubled free-boundary problem is solved as a nested minimization: a
convex minimal-graph problem for fixed profile inside a search over convex
symmetric profiles, compared against the degenerate value ``pi``.
"""

from .geometry import ConvexProfile, HalfProfile, eval_phi, project_profile, subgraph_measure
from .discretization import FittedMesh, GridFunction, build_fitted_mesh, lift_area
from .functional import FunctionalBreakdown, check_doubling, eval_F2l, eval_Fl
from .inner_solver import InnerSolverError, residual_msq, solve_min_graph
from .outer_optimizer import OptimizerConfig, SolveReport, minimize_over_profiles, value_of_profile
from .plateau import build_gamma, catenoid_oracle, compare_with_nonparametric, solve_plateau
from .analysis import SweepRecord, sweep, threshold_bisect, vortex_relaxed_area

__version__ = "0.1.0"

__all__ = [
    "ConvexProfile",
    "HalfProfile",
    "eval_phi",
    "project_profile",
    "subgraph_measure",
    "FittedMesh",
    "GridFunction",
    "build_fitted_mesh",
    "lift_area",
    "FunctionalBreakdown",
    "check_doubling",
    "eval_F2l",
    "eval_Fl",
    "InnerSolverError",
    "residual_msq",
    "solve_min_graph",
    "OptimizerConfig",
    "SolveReport",
    "minimize_over_profiles",
    "value_of_profile",
    "build_gamma",
    "catenoid_oracle",
    "compare_with_nonparametric",
    "solve_plateau",
    "SweepRecord",
    "sweep",
    "threshold_bisect",
    "vortex_relaxed_area",
]
