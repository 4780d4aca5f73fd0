"""Doubly reflected SDEs driven by a step path and a sampled Brownian motion.

The solution of

    X = H + ∫ σ(s, X) dB + ∫ a(s, X) ds + K⁺ − K⁻,   L <= X <= U

is computed by fixed-point iteration on a fixed Brownian path: evaluate the
integrals along the current iterate with left-point Euler sums, then reflect
the result between the barriers.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .paths import DEFAULT_TOL, GridPath, TimeGrid, check_same_grid, sup_distance, total_variation
from .separation import BarrierPair, solve_spr_separated
from .spr import SprProblem, SprSolution

log = logging.getLogger(__name__)

CoefficientFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Affine:
    """``(t, x) -> offset + slope * x``; picklable, unlike a lambda."""

    offset: float = 0.0
    slope: float = 0.0

    def __call__(self, t, x):
        return self.offset + self.slope * np.asarray(x, dtype=float) + 0.0 * np.asarray(t)


@dataclass(frozen=True)
class Coefficients:
    sigma: CoefficientFn
    drift: CoefficientFn
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")

    @classmethod
    def affine(cls, sigma0, sigma1, drift0, drift1) -> "Coefficients":
        lip = abs(sigma1) + abs(drift1)
        lam = max(lip, abs(sigma0) + abs(drift0))
        return cls(Affine(sigma0, sigma1), Affine(drift0, drift1), lam)

    @classmethod
    def constant(cls, sigma=0.0, drift=0.0):
        return cls.affine(sigma, 0.0, drift, 0.0)

    @classmethod
    def linear_drift(cls, sigma=0.0, slope=1.0, intercept=0.0):
        return cls.affine(sigma, 0.0, intercept, slope)

    @classmethod
    def ou(cls, sigma=1.0, theta=1.0, mean=0.0):
        return cls.affine(sigma, 0.0, theta * mean, -theta)

    @classmethod
    def gbm_like(cls, sigma=0.2, mu=0.0):
        return cls.affine(0.0, sigma, 0.0, mu)


BUILTIN_COEFFICIENTS = {
    "constant": Coefficients.constant,
    "linear-drift": Coefficients.linear_drift,
    "ou": Coefficients.ou,
    "gbm-like": Coefficients.gbm_like,
}


def make_coefficients(name: str, **params) -> Coefficients:
    try:
        factory = BUILTIN_COEFFICIENTS[name]
    except KeyError:
        raise ValueError(f"unknown coefficient family {name!r}; choose from {sorted(BUILTIN_COEFFICIENTS)}")
    return factory(**params)


def check_lipschitz(
    coeffs: Coefficients, grid: TimeGrid, samples: int = 1000, seed: int = 0, scale: float = 10.0
) -> dict:
    """Spot-check the Lipschitz and linear-growth bounds at random points.

    Returns the worst observed ratio for each bound; both should be <= 1.
    """
    rng = np.random.default_rng(seed)
    t = rng.choice(grid.points, samples)
    x = rng.uniform(-scale, scale, samples)
    y = rng.uniform(-scale, scale, samples)
    lam = coeffs.lam if coeffs.lam > 0 else np.finfo(float).tiny
    diff = np.abs(coeffs.sigma(t, x) - coeffs.sigma(t, y)) + np.abs(coeffs.drift(t, x) - coeffs.drift(t, y))
    size = np.abs(coeffs.sigma(t, x)) + np.abs(coeffs.drift(t, x))
    dx = np.abs(x - y)
    lip = diff[dx > 0] / (lam * dx[dx > 0])
    return {
        "lipschitz_ratio": float(np.max(lip, initial=0.0)),
        "growth_ratio": float(np.max(size / (lam * (1 + np.abs(x))))),
    }


def path_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent stream for path ``index`` of a batch seeded with ``seed``."""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def sample_brownian(grid: TimeGrid, seed) -> GridPath:
    """Brownian motion sampled on ``grid``; ``seed`` is an int or SeedSequence."""
    rng = np.random.default_rng(seed)
    dt = np.diff(grid.points)
    inc = rng.standard_normal(dt.size) * np.sqrt(dt)
    return GridPath(grid, np.concatenate(([0.0], np.cumsum(inc))))


@dataclass(frozen=True, eq=False)
class SdeProblem:
    H: GridPath
    coefficients: Coefficients
    barriers: BarrierPair
    brownian: GridPath | None = None
    tol_fixed_point: float = 1e-10
    max_iterations: int = 50
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        paths = [self.H, self.barriers.lower, self.barriers.upper]
        if self.brownian is not None:
            paths.append(self.brownian)
        check_same_grid(*paths)
        L0, U0, H0 = self.barriers.lower[0], self.barriers.upper[0], self.H[0]
        if not (L0 - self.tol <= H0 <= U0 + self.tol):
            raise ValueError(f"need L_0 <= H_0 <= U_0, got {L0} <= {H0} <= {U0}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tol_fixed_point >= 0:
            raise ValueError("tol_fixed_point must be nonnegative")

    @property
    def grid(self) -> TimeGrid:
        return self.H.grid

    @property
    def L(self) -> GridPath:
        return self.barriers.lower

    @property
    def U(self) -> GridPath:
        return self.barriers.upper


@dataclass
class PicardTrace:
    residuals: list[float] = field(default_factory=list)
    converged: bool = False
    tol: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    @property
    def ratios(self) -> list[float]:
        r = self.residuals
        return [r[i + 1] / r[i] if r[i] > 0 else math.nan for i in range(len(r) - 1)]

    def as_dict(self) -> dict:
        return {
            "residuals": self.residuals,
            "ratios": self.ratios,
            "iterations": self.iterations,
            "converged": self.converged,
            "tol_fixed_point": self.tol,
        }


class PicardNotConverged(RuntimeError):
    def __init__(self, trace: PicardTrace, last: SprSolution):
        res = trace.residuals[-1] if trace.residuals else math.nan
        super().__init__(f"no convergence after {trace.iterations} iterations (residual {res:.3e})")
        self.trace = trace
        self.last = last


def euler_integrals(X: GridPath, problem: SdeProblem) -> GridPath:
    """``H_k + Σ_{j<k} σ(t_j, X_j) ΔB_j + Σ_{j<k} a(t_j, X_j) Δt_j``."""
    if problem.brownian is None:
        raise ValueError("problem has no Brownian path")
    check_same_grid(X, problem.H, problem.brownian)
    t = problem.grid.points
    x = X.values[:-1]
    sig = np.broadcast_to(problem.coefficients.sigma(t[:-1], x), x.shape)
    drf = np.broadcast_to(problem.coefficients.drift(t[:-1], x), x.shape)
    if not (np.all(np.isfinite(sig)) and np.all(np.isfinite(drf))):
        raise FloatingPointError("coefficient evaluation produced non-finite values")
    inc = sig * np.diff(problem.brownian.values) + drf * np.diff(t)
    return GridPath(problem.grid, problem.H.values + np.concatenate(([0.0], np.cumsum(inc))))


def picard_solve(problem: SdeProblem, x0: GridPath | None = None) -> tuple[SprSolution, PicardTrace]:
    """Fixed-point iteration ``X^{n+1} = SPR(euler_integrals(X^n))``.

    Starts from ``X^0 = H`` unless ``x0`` is given.  ``residuals[n]`` is the
    sup distance between ``X^{n+1}`` and ``X^n``.

    Raises
    ------
    PicardNotConverged
        When ``max_iterations`` solves leave the residual above
        ``tol_fixed_point``; the exception carries the trace and last iterate.
    """
    X = problem.H if x0 is None else x0
    check_same_grid(X, problem.H)
    trace = PicardTrace(tol=problem.tol_fixed_point)
    sol = None
    for _ in range(problem.max_iterations):
        Y = euler_integrals(X, problem)
        sol = solve_spr_separated(SprProblem(Y, problem.barriers, problem.tol))
        r = sup_distance(sol.X, X)
        trace.residuals.append(r)
        X = sol.X
        if r <= problem.tol_fixed_point:
            trace.converged = True
            return sol, trace
    raise PicardNotConverged(trace, sol)


@dataclass
class ContractionReport:
    ratios: list[float]
    log_c: float
    rho: float
    m_fit: float  # rho / T, comparable to the constant M of the factorial bound
    dominated: bool
    exact: bool
    lam: float
    horizon: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def contraction_report(trace: PicardTrace, lam: float, T: float) -> ContractionReport:
    """Fit ``r_n ≈ c ρ^n / n!`` to the residuals of a Picard run.

    Informational only: a single path gives a noisy picture of the
    expectation-level bound.  ``exact`` flags runs whose residuals vanish
    after the first step; ``dominated`` says the tail stays within one decade
    of the fitted envelope.
    """
    r = np.asarray(trace.residuals, dtype=float)
    if r.size < 3:
        raise ValueError("need at least 3 residuals")
    ratios = trace.ratios
    if np.all(r[1:] == 0):
        return ContractionReport(ratios, math.log(r[0]) if r[0] > 0 else -math.inf,
                                 0.0, 0.0, True, True, lam, T)
    n = np.arange(r.size)
    pos = r > 0
    y = np.log(r[pos]) + np.array([math.lgamma(k + 1) for k in n[pos]])
    if pos.sum() >= 2:
        slope, log_c = np.polyfit(n[pos], y, 1)
    else:
        slope, log_c = 0.0, float(y[0])
    rho = float(math.exp(slope))
    log_env = log_c + n * slope - np.array([math.lgamma(k + 1) for k in n])
    tail = n >= r.size // 2
    with np.errstate(divide="ignore"):
        dominated = bool(np.all(np.log(r[tail]) <= log_env[tail] + math.log(10.0)))
    return ContractionReport(ratios, float(log_c), rho, rho / T, dominated, False, lam, T)


@dataclass
class MonteCarloStats:
    n_paths: int
    seed: int
    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    mean_total_variation: float
    total_variation_second_moment: float
    failures: int
    max_constraint_residual: float
    iterations: list[int]

    def as_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "seed": self.seed,
            "failures": self.failures,
            "mean_total_variation": self.mean_total_variation,
            "total_variation_second_moment": self.total_variation_second_moment,
            "max_constraint_residual": self.max_constraint_residual,
            "mean_iterations": float(np.mean(self.iterations)) if self.iterations else math.nan,
            "terminal_mean": float(self.mean[-1]),
            "terminal_variance": float(self.variance[-1]),
            "t": self.times.tolist(),
            "mean": self.mean.tolist(),
            "variance": self.variance.tolist(),
        }


def _run_paths(template: SdeProblem, seed: int, indices: range):
    out = []
    for i in indices:
        B = sample_brownian(template.grid, path_seed(seed, i))
        try:
            sol, trace = picard_solve(replace(template, brownian=B))
        except PicardNotConverged:
            out.append(None)
            continue
        out.append((sol.X.values, total_variation(sol.K), sol.report.residual_eq2, trace.iterations))
    return out


def monte_carlo(template: SdeProblem, n_paths: int, seed: int, workers: int = 1) -> MonteCarloStats:
    """Solve ``n_paths`` independent copies and aggregate pathwise statistics.

    Path ``i`` uses the Brownian stream ``path_seed(seed, i)``, so results
    do not depend on ``workers``.  Non-converged paths are counted as
    failures and left out of the moments.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if workers <= 1:
        results = _run_paths(template, seed, range(n_paths))
    else:
        bounds = np.linspace(0, n_paths, workers + 1).astype(int)
        chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_paths, [template] * len(chunks), [seed] * len(chunks), chunks)
            results = [r for part in parts for r in part]

    ok = [r for r in results if r is not None]
    failures = len(results) - len(ok)
    if failures:
        log.warning("%d of %d paths did not converge", failures, n_paths)
    m = len(template.grid)
    if ok:
        xs = np.stack([r[0] for r in ok])
        tv = np.array([r[1] for r in ok])
        shifted = xs - xs[0]  # shifted data keeps identical paths at exactly zero variance
        mean = xs[0] + shifted.mean(axis=0)
        var = shifted.var(axis=0, ddof=1) if len(ok) > 1 else np.zeros(m)
        mean_tv, tv2 = float(tv.mean()), float(np.mean(tv ** 2))
        max_res = float(max(r[2] for r in ok))
    else:
        mean = var = np.full(m, math.nan)
        mean_tv = tv2 = max_res = math.nan
    return MonteCarloStats(
        n_paths=n_paths,
        seed=seed,
        times=template.grid.points.copy(),
        mean=mean,
        variance=var,
        mean_total_variation=mean_tv,
        total_variation_second_moment=tv2,
        failures=failures,
        max_constraint_residual=max_res,
        iterations=[r[3] for r in ok],
    )
