from .brute_force import brute_force_tstar, lattice_size
from .solver import (
    ConstrainedSolution,
    OptimalAllocation,
    anchor_residual,
    index_spread,
    lower_bound,
    solve_beta_optimal,
    solve_common_index_fixed_n1,
    solve_constrained,
    solve_constrained_total,
    solve_na_given_n1,
    solve_optimal,
)

__all__ = [
    "ConstrainedSolution",
    "OptimalAllocation",
    "anchor_residual",
    "brute_force_tstar",
    "index_spread",
    "lattice_size",
    "lower_bound",
    "solve_beta_optimal",
    "solve_common_index_fixed_n1",
    "solve_constrained",
    "solve_constrained_total",
    "solve_na_given_n1",
    "solve_optimal",
]
