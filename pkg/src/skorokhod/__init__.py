"""Two-sided Skorokhod reflection for step paths and doubly reflected SDEs."""
from .paths import (
    BoundedVariationPath,
    GridMismatchError,
    GridPath,
    TimeGrid,
    left_limit,
    stieltjes_sum,
    sup_distance,
    total_variation,
)
from .separation import (
    BarrierPair,
    SeparationError,
    approx_lower,
    approx_upper,
    separation_gap,
    solve_spr_separated,
    stationarity_index,
)
from .spr import (
    SprProblem,
    SprSolution,
    lemma1_gap_bound,
    one_sided_reflect_lower,
    one_sided_reflect_upper,
    solve_spr_alternating,
    solve_spr_discrete_oracle,
    verify_solution,
)
from .sde import (
    Coefficients,
    SdeProblem,
    contraction_report,
    euler_integrals,
    monte_carlo,
    picard_solve,
    sample_brownian,
)

__version__ = "0.1.0"
