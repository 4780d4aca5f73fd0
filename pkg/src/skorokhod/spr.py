"""Two-sided Skorokhod problem on step paths.

``solve_spr_alternating`` builds the compensators by alternating one-sided
reflections: push up at ``L`` until the pushed path reaches ``U``, freeze,
push down at ``U`` until it reaches ``L``, freeze, and so on.
``solve_spr_discrete_oracle`` clamps one step at a time and serves as the
independent reference.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .paths import (
    DEFAULT_TOL,
    BoundedVariationPath,
    GridPath,
    check_same_grid,
    stieltjes_cumsum,
    sup_distance,
)
from .separation import BarrierPair, SeparationError, first_touching_index


class InitialConditionError(ValueError):
    """``L_0 <= Y_0 <= U_0`` does not hold."""


@dataclass(frozen=True, eq=False)
class SprProblem:
    Y: GridPath
    barriers: BarrierPair
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        L, U = self.barriers.lower, self.barriers.upper
        check_same_grid(self.Y, L, U)
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if np.any(L.values > U.values + self.tol):
            k = int(np.argmax(L.values > U.values + self.tol))
            raise SeparationError(f"L > U at grid index {k}", index=k)
        y0, l0, u0 = self.Y.values[0], L.values[0], U.values[0]
        if not (l0 - self.tol <= y0 <= u0 + self.tol):
            raise InitialConditionError(f"need L_0 <= Y_0 <= U_0, got {l0} <= {y0} <= {u0}")

    @classmethod
    def from_paths(cls, Y, L, U, tol=DEFAULT_TOL) -> "SprProblem":
        return cls(Y, BarrierPair(L, U), tol)

    @property
    def L(self) -> GridPath:
        return self.barriers.lower

    @property
    def U(self) -> GridPath:
        return self.barriers.upper

    @property
    def grid(self):
        return self.Y.grid


@dataclass(frozen=True)
class SprReport:
    residual_eq1: float
    residual_eq2: float
    residual_eq3_plus: float
    residual_eq3_minus: float
    support_plus: float
    support_minus: float
    kplus_monotone: bool
    kminus_monotone: bool
    starts_at_zero: bool
    tol: float
    tol_eq3: float

    @property
    def passed(self) -> bool:
        return (
            self.residual_eq1 <= self.tol
            and self.residual_eq2 <= self.tol
            and abs(self.residual_eq3_plus) <= self.tol_eq3
            and abs(self.residual_eq3_minus) <= self.tol_eq3
            and self.kplus_monotone
            and self.kminus_monotone
            and self.starts_at_zero
        )

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["passed"] = self.passed
        return d


@dataclass(frozen=True, eq=False)
class SprSolution:
    X: GridPath
    K: BoundedVariationPath
    report: SprReport | None = None

    @property
    def Kplus(self) -> GridPath:
        return self.K.plus

    @property
    def Kminus(self) -> GridPath:
        return self.K.minus


@dataclass
class Phase:
    barrier: str  # "lower" or "upper"
    start: int
    stop: int  # index where the compensator froze; N + 1 if never
    compensator: np.ndarray


@dataclass
class AlternatingTrace:
    """Hitting times of the alternating construction.

    ``lower_hits`` and ``upper_hits`` are the grid indices at which each phase
    began (``T_k`` and ``S_k``); ``sentinel`` stands for "beyond the horizon".
    """

    sentinel: int
    first_barrier: str | None = None
    phases: list[Phase] = field(default_factory=list)

    @property
    def hits(self) -> list[tuple[str, int]]:
        return [(p.barrier, p.start) for p in self.phases]

    @property
    def lower_hits(self) -> list[int]:
        return [p.start for p in self.phases if p.barrier == "lower"]

    @property
    def upper_hits(self) -> list[int]:
        return [p.start for p in self.phases if p.barrier == "upper"]

    @property
    def crossings(self) -> int:
        """Number of barrier-to-barrier crossings."""
        return max(len(self.phases) - 1, 0)

    def summary(self) -> dict:
        return {
            "first_barrier": self.first_barrier,
            "crossings": self.crossings,
            "lower_hits": self.lower_hits,
            "upper_hits": self.upper_hits,
            "sentinel": self.sentinel,
        }


def _first_at_or_after(mask: np.ndarray, start: int) -> int:
    sub = mask[start:]
    return start + int(np.argmax(sub)) if sub.any() else mask.size


def one_sided_reflect_lower(Y: GridPath, L: GridPath) -> tuple[GridPath, GridPath]:
    """Reflect ``Y`` upward at ``L``: ``phi = sup_{s<=t} (L - Y)^+``."""
    check_same_grid(Y, L)
    phi = np.maximum.accumulate(np.maximum(L.values - Y.values, 0.0))
    return GridPath(Y.grid, Y.values + phi), GridPath(Y.grid, phi)


def one_sided_reflect_upper(Y: GridPath, U: GridPath) -> tuple[GridPath, GridPath]:
    """Reflect ``Y`` downward at ``U``: ``psi = sup_{s<=t} (Y - U)^+``."""
    check_same_grid(Y, U)
    psi = np.maximum.accumulate(np.maximum(Y.values - U.values, 0.0))
    return GridPath(Y.grid, Y.values - psi), GridPath(Y.grid, psi)


def _require_gap(problem: SprProblem) -> None:
    gap = problem.barriers.gap
    if gap <= 2 * problem.tol:
        k = first_touching_index(problem.L, problem.U)
        where = f" (first touching index {k})" if k is not None else ""
        raise SeparationError(
            f"alternating construction needs gap > 2*tol, got gap={gap!r}{where}", index=k
        )


def _assemble(problem: SprProblem, X: np.ndarray, kp: np.ndarray, km: np.ndarray) -> SprSolution:
    g = problem.grid
    K = BoundedVariationPath(GridPath(g, kp), GridPath(g, km), max(problem.tol, 1e-15))
    sol = SprSolution(GridPath(g, X), K)
    return replace(sol, report=verify_solution(problem, sol))


def solve_spr_alternating(problem: SprProblem) -> tuple[SprSolution, AlternatingTrace]:
    """Alternate one-sided reflections until no barrier is hit again.

    Requires ``min (U - L) > 2 tol`` so that every phase advances by at
    least one grid index.
    """
    _require_gap(problem)
    Y, L, U, tol = problem.Y.values, problem.L.values, problem.U.values, problem.tol
    n = Y.size
    trace = AlternatingTrace(sentinel=n)

    base = Y.copy()  # Y plus all frozen compensators so far
    kp = np.zeros(n)
    km = np.zeros(n)

    lo = _first_at_or_after(base <= L + tol, 0)
    up = _first_at_or_after(base >= U - tol, 0)
    if lo == n and up == n:
        return _assemble(problem, base, kp, km), trace
    barrier = "lower" if lo <= up else "upper"
    trace.first_barrier = barrier
    start = min(lo, up)

    while start < n:
        comp = np.zeros(n)
        if barrier == "lower":
            comp[start:] = np.maximum.accumulate(np.maximum(L[start:] - base[start:], 0.0))
            stop = _first_at_or_after(base + comp >= U - tol, start)
        else:
            comp[start:] = np.maximum.accumulate(np.maximum(base[start:] - U[start:], 0.0))
            stop = _first_at_or_after(base - comp <= L + tol, start)
        if stop < n:
            comp[stop + 1:] = comp[stop]
        if barrier == "lower":
            base = base + comp
            kp += comp
        else:
            base = base - comp
            km += comp
        trace.phases.append(Phase(barrier, start, stop, comp))
        start = stop
        barrier = "upper" if barrier == "lower" else "lower"

    return _assemble(problem, base, kp, km), trace


def solve_spr_discrete_oracle(problem: SprProblem) -> SprSolution:
    """Forward recursion ``X_k = clamp(X_{k-1} + ΔY_k, L_k, U_k)``."""
    Y, L, U = problem.Y.values, problem.L.values, problem.U.values
    n = Y.size
    X = np.empty(n)
    dkp = np.zeros(n)
    dkm = np.zeros(n)
    X[0] = Y[0]
    for k in range(1, n):
        c = X[k - 1] + (Y[k] - Y[k - 1])
        if c < L[k]:
            dkp[k] = L[k] - c
            X[k] = L[k]
        elif c > U[k]:
            dkm[k] = c - U[k]
            X[k] = U[k]
        else:
            X[k] = c
    return _assemble(problem, X, np.cumsum(dkp), np.cumsum(dkm))


def verify_solution(
    problem: SprProblem,
    sol: SprSolution,
    tol: float | None = None,
    tol_eq3: float | None = None,
) -> SprReport:
    """Residuals of the three defining conditions for a candidate solution."""
    tol = problem.tol if tol is None else tol
    tol_eq3 = tol if tol_eq3 is None else tol_eq3
    Y, L, U = problem.Y, problem.L, problem.U
    X, kp, km = sol.X, sol.K.plus, sol.K.minus
    check_same_grid(Y, L, U, X, kp, km)

    x = X.values
    eq1 = sup_distance(X, Y + kp - km)
    eq2 = float(np.max(np.maximum(np.maximum(L.values - x, x - U.values), 0.0)))
    dkp, dkm = np.diff(kp.values), np.diff(km.values)
    return SprReport(
        residual_eq1=eq1,
        residual_eq2=eq2,
        residual_eq3_plus=float(np.dot(x[1:] - L.values[1:], dkp)),
        residual_eq3_minus=float(np.dot(U.values[1:] - x[1:], dkm)),
        support_plus=_support_residual(x[1:] - L.values[1:], dkp),
        support_minus=_support_residual(U.values[1:] - x[1:], dkm),
        kplus_monotone=bool(np.all(dkp >= 0)),
        kminus_monotone=bool(np.all(dkm >= 0)),
        starts_at_zero=bool(kp.values[0] == 0.0 and km.values[0] == 0.0),
        tol=tol,
        tol_eq3=tol_eq3,
    )


def _support_residual(distance: np.ndarray, increments: np.ndarray) -> float:
    """Largest barrier distance at an index where the compensator moves."""
    charged = increments > 0
    return float(np.max(np.abs(distance[charged]))) if charged.any() else 0.0


def solution_distance(a: SprSolution, b: SprSolution) -> float:
    """Max sup distance over ``X``, ``K⁺`` and ``K⁻``."""
    return max(
        sup_distance(a.X, b.X),
        sup_distance(a.K.plus, b.K.plus),
        sup_distance(a.K.minus, b.K.minus),
    )


def lemma1_gap_bound(
    sol_a: SprSolution, sol_b: SprSolution, U: GridPath, U_tilde: GridPath
) -> tuple[GridPath, GridPath]:
    """Stability bound for a perturbed upper barrier.

    ``sol_a`` solves the problem with upper barrier ``U`` and ``sol_b`` the
    one with ``U_tilde`` (same ``Y`` and ``L``).  Returns ``lhs = (X - X̃)²``
    and ``rhs = 2∫(Ũ - U) dK⁻ + 2∫(U - Ũ) dK̃⁻`` at every grid point.
    """
    check_same_grid(sol_a.X, sol_b.X, U, U_tilde)
    d = U_tilde - U
    lhs = (sol_a.X.values - sol_b.X.values) ** 2
    rhs = 2 * stieltjes_cumsum(d, sol_a.K.minus) - 2 * stieltjes_cumsum(d, sol_b.K.minus)
    g = U.grid
    return GridPath(g, lhs), GridPath(g, rhs)


def lemma1_gap_bound_lower(
    sol_a: SprSolution, sol_b: SprSolution, L: GridPath, L_tilde: GridPath
) -> tuple[GridPath, GridPath]:
    """Mirror of ``lemma1_gap_bound`` for a perturbed lower barrier.

    ``rhs = 2∫(L - L̃) dK⁺ + 2∫(L̃ - L) dK̃⁺``.
    """
    check_same_grid(sol_a.X, sol_b.X, L, L_tilde)
    d = L - L_tilde
    lhs = (sol_a.X.values - sol_b.X.values) ** 2
    rhs = 2 * stieltjes_cumsum(d, sol_a.K.plus) - 2 * stieltjes_cumsum(d, sol_b.K.plus)
    g = L.grid
    return GridPath(g, lhs), GridPath(g, rhs)


__all__ = [
    "AlternatingTrace",
    "InitialConditionError",
    "SprProblem",
    "SprReport",
    "SprSolution",
    "lemma1_gap_bound",
    "lemma1_gap_bound_lower",
    "one_sided_reflect_lower",
    "one_sided_reflect_upper",
    "solution_distance",
    "solve_spr_alternating",
    "solve_spr_discrete_oracle",
    "verify_solution",
]
