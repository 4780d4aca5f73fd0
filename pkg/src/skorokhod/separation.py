"""Completely separated barriers and their reduction to a uniform gap.

For barriers with ``inf (U - L) > 0`` the lifted upper barrier
``U^n = max(U, L + 1/n)`` coincides with ``U`` as soon as ``1/n`` fits under
the gap.  On a finite grid that happens at a finite ``n*``, so solving once
with ``U^{n*}`` solves the original problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .paths import GridPath, check_same_grid


class SeparationError(ValueError):
    """Barriers touch (or cross) somewhere on the grid."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def separation_gap(L: GridPath, U: GridPath) -> float:
    """``min_k (U_k - L_k)``.

    Left-limit differences are the pointwise differences at ``k - 1`` on a
    step grid, so they add nothing to the minimum.
    """
    check_same_grid(L, U)
    return float(np.min(U.values - L.values))


def first_touching_index(L: GridPath, U: GridPath) -> int | None:
    bad = U.values - L.values <= 0
    return int(np.argmax(bad)) if bad.any() else None


@dataclass(frozen=True, eq=False)
class BarrierPair:
    lower: GridPath
    upper: GridPath
    gap: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gap", separation_gap(self.lower, self.upper))

    @property
    def grid(self):
        return self.lower.grid

    @property
    def status(self) -> str:
        """``"H1"`` for completely separated barriers, else ``"touching"``."""
        return "H1" if self.gap > 0 else "touching"

    def satisfies_uniform_gap(self, eps: float) -> bool:
        return eps > 0 and self.gap >= eps


def approx_upper(L: GridPath, U: GridPath, n: int) -> GridPath:
    """``max(U, L + 1/n)``, lifting ``U`` to keep a gap of at least ``1/n``."""
    check_same_grid(L, U)
    if n < 1:
        raise ValueError("n must be a positive integer")
    return GridPath(U.grid, np.maximum(U.values, L.values + 1.0 / n))


def approx_lower(L: GridPath, U: GridPath, n: int) -> GridPath:
    """Mirror of ``approx_upper``: ``min(L, U - 1/n)``."""
    check_same_grid(L, U)
    if n < 1:
        raise ValueError("n must be a positive integer")
    return GridPath(L.grid, np.minimum(L.values, U.values - 1.0 / n))


def index_for_gap(gap: float) -> int:
    """Smallest ``n >= 1`` with ``1/n <= gap`` in floating point."""
    if not gap > 0:
        raise SeparationError(f"gap must be positive, got {gap!r}")
    n = max(1, math.ceil(1.0 / gap))
    # ceil(1/gap) can land one off when 1/gap rounds across an integer
    while n > 1 and 1.0 / (n - 1) <= gap:
        n -= 1
    while 1.0 / n > gap:
        n += 1
    return n


def stationarity_index(L: GridPath, U: GridPath) -> int:
    """Smallest ``n`` for which ``approx_upper(L, U, n)`` equals ``U`` exactly.

    The candidate from ``index_for_gap`` is corrected against the actual
    floating-point sums ``L_k + 1/n``, which can round past ``U_k`` when the
    gap is hit exactly.
    """
    check_same_grid(L, U)
    gap = separation_gap(L, U)
    if gap <= 0:
        k = first_touching_index(L, U)
        raise SeparationError(f"barriers touch at grid index {k}", index=k)

    def stationary(n: int) -> bool:
        return bool(np.all(L.values + 1.0 / n <= U.values))

    n = index_for_gap(gap)
    while not stationary(n):
        n += 1
    while n > 1 and stationary(n - 1):
        n -= 1
    return n


def solve_spr_separated(problem, *, check_stationary: bool = False):
    """Solve ``SPR(Y, L, U)`` for completely separated barriers.

    Parameters
    ----------
    problem : SprProblem
    check_stationary : bool
        Also solve with ``U^{n*+1}`` and assert both solutions coincide.

    Returns
    -------
    SprSolution
    """
    from .spr import SprProblem, solve_spr_alternating, solution_distance

    L, U = problem.barriers.lower, problem.barriers.upper
    n_star = stationarity_index(L, U)
    U_n = approx_upper(L, U, n_star)
    lifted = SprProblem(problem.Y, BarrierPair(L, U_n), problem.tol)
    sol, _ = solve_spr_alternating(lifted)
    if check_stationary:
        nxt = SprProblem(problem.Y, BarrierPair(L, approx_upper(L, U, n_star + 1)), problem.tol)
        sol_next, _ = solve_spr_alternating(nxt)
        d = solution_distance(sol, sol_next)
        assert d <= problem.tol, f"solutions for n*={n_star} and n*+1 differ by {d}"
    return sol


@dataclass
class ApproximationStep:
    n: int
    solution: object
    lemma1_slack: float  # min over the grid of rhs - lhs against the n* solution


def approximation_sequence(problem, n_max: int | None = None) -> list[ApproximationStep]:
    """Solve ``SPR(Y, L, U^n)`` for ``n = 1..n_max`` (default ``n*``).

    Diagnostic mode: each step records how much room the stability bound
    leaves between the ``n``-solution and the final one.
    """
    from .spr import SprProblem, lemma1_gap_bound, solve_spr_alternating

    L, U = problem.barriers.lower, problem.barriers.upper
    n_star = stationarity_index(L, U)
    n_max = n_star if n_max is None else n_max
    final = solve_spr_separated(problem)
    steps = []
    for n in range(1, n_max + 1):
        U_n = approx_upper(L, U, n)
        sol, _ = solve_spr_alternating(SprProblem(problem.Y, BarrierPair(L, U_n), problem.tol))
        lhs, rhs = lemma1_gap_bound(final, sol, U, U_n)
        steps.append(ApproximationStep(n, sol, float(np.min(rhs.values - lhs.values))))
    return steps
