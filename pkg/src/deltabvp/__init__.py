"""Solver and verifier for discrete second-order boundary value problems on
non-uniform time grids with mixed non-homogeneous boundary conditions."""

from .auxiliary import AuxProblem, aux_f, aux_residual, build_aux_problem, estimate_M, sigma
from .bounds import BoundsPair, check_lower, check_ordering, check_upper
from .grid import (
    Grid,
    GridFunction,
    constant_function,
    delta,
    delta2,
    make_grid,
    sup_norm,
    uniform_grid,
)
from .operator import apply_T, delta_from_f, fixed_point_residual, invariance_radius
from .problem import (
    BVProblem,
    check_assumptions,
    decompose,
    equation_residual,
    membership,
    particular_solution,
)
from .solver import (
    SolveOptions,
    SolveReport,
    brouwer_1d,
    solve,
    solve_damped,
    solve_newton,
    verify_solution,
)

__all__ = [
    "AuxProblem", "BVProblem", "BoundsPair", "Grid", "GridFunction",
    "SolveOptions", "SolveReport",
    "apply_T", "aux_f", "aux_residual", "brouwer_1d", "build_aux_problem",
    "check_assumptions", "check_lower", "check_ordering", "check_upper",
    "constant_function", "decompose", "delta", "delta2", "delta_from_f",
    "equation_residual", "estimate_M", "fixed_point_residual",
    "invariance_radius", "make_grid", "membership", "particular_solution",
    "sigma", "solve", "solve_damped", "solve_newton", "sup_norm",
    "uniform_grid", "verify_solution",
]

__version__ = "0.1.0"
