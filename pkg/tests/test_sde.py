import math
from dataclasses import replace

import numpy as np
import pytest

from skorokhod.paths import GridPath, TimeGrid, clamp, sup_distance
from skorokhod.sde import (
    Coefficients,
    PicardNotConverged,
    PicardTrace,
    SdeProblem,
    check_lipschitz,
    contraction_report,
    euler_integrals,
    make_coefficients,
    monte_carlo,
    path_seed,
    picard_solve,
    sample_brownian,
)
from skorokhod.separation import BarrierPair, solve_spr_separated
from skorokhod.spr import SprProblem


def sde_problem(coeffs, steps=128, H=0.0, L=-1.0, U=1.0, seed=1, T=1.0, **kw):
    g = TimeGrid.uniform(T, steps)
    Hp = H if isinstance(H, GridPath) else GridPath.constant(g, H)
    bp = BarrierPair(GridPath.constant(g, L), GridPath.constant(g, U))
    return SdeProblem(Hp, coeffs, bp, sample_brownian(g, seed), **kw)


class TestCoefficients:
    @pytest.mark.parametrize("name, params", [
        ("constant", {"sigma": 0.3, "drift": -1.0}),
        ("linear-drift", {"sigma": 0.2, "slope": 1.5, "intercept": 0.1}),
        ("ou", {"sigma": 0.2, "theta": 2.0, "mean": 0.5}),
        ("gbm-like", {"sigma": 0.4, "mu": 0.1}),
    ])
    def test_builtins_satisfy_bounds(self, name, params):
        c = make_coefficients(name, **params)
        ratios = check_lipschitz(c, TimeGrid.uniform(1, 16))
        assert ratios["lipschitz_ratio"] <= 1 + 1e-12
        assert ratios["growth_ratio"] <= 1 + 1e-12

    def test_unknown(self):
        with pytest.raises(ValueError):
            make_coefficients("cubic")

    def test_violation_detected(self):
        c = Coefficients(lambda t, x: x ** 2, lambda t, x: 0 * x, lam=1.0)
        assert check_lipschitz(c, TimeGrid.uniform(1, 4))["lipschitz_ratio"] > 1


class TestBrownian:
    def test_starts_at_zero_and_is_deterministic(self):
        g = TimeGrid.uniform(1, 64)
        a, b = sample_brownian(g, 42), sample_brownian(g, 42)
        assert a.values[0] == 0.0
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, sample_brownian(g, 43).values)

    def test_terminal_variance(self):
        # Var of the sample variance of N(0,1) is 2/n; 2% is ~4.5 standard errors at n=1e5
        g = TimeGrid.uniform(1, 64)
        b1 = np.array([sample_brownian(g, path_seed(9, i)).values[-1] for i in range(100_000)])
        assert abs(b1.var() - 1.0) <= 0.02

    def test_nonuniform_grid_increments(self):
        g = TimeGrid(np.array([0.0, 0.01, 1.0]))
        inc = np.array([np.diff(sample_brownian(g, i).values) for i in range(20000)])
        assert inc[:, 0].var() == pytest.approx(0.01, rel=0.05)
        assert inc[:, 1].var() == pytest.approx(0.99, rel=0.05)


class TestEulerIntegrals:
    def test_zero_coefficients(self):
        p = sde_problem(Coefficients.constant(), H=0.3)
        assert np.array_equal(euler_integrals(p.H, p).values, p.H.values)

    def test_unit_drift(self):
        p = sde_problem(Coefficients.constant(drift=1.0), steps=10)
        Y = euler_integrals(p.H, p)
        assert np.allclose(Y.values, p.grid.points, atol=1e-15)

    def test_unit_sigma(self):
        p = sde_problem(Coefficients.constant(sigma=1.0))
        Y = euler_integrals(p.H, p)
        assert np.allclose(Y.values, p.brownian.values, atol=1e-13)

    def test_left_point_evaluation(self):
        # a(t, x) = x with X a step path: sum uses X_j on [t_j, t_{j+1})
        p = sde_problem(Coefficients.linear_drift(slope=1.0), steps=4)
        X = GridPath(p.grid, [0.0, 1.0, 2.0, 3.0, 4.0])
        Y = euler_integrals(X, p)
        assert np.allclose(Y.values, [0, 0, 0.25, 0.75, 1.5])

    def test_nonfinite(self):
        c = Coefficients(lambda t, x: np.full_like(x, np.nan), lambda t, x: 0 * x, lam=1.0)
        p = sde_problem(c)
        with pytest.raises(FloatingPointError):
            euler_integrals(p.H, p)


class TestPicard:
    def test_degenerate_reduces_to_spr(self):
        g = TimeGrid.uniform(1, 50)
        H = GridPath(g, 0.8 * np.sin(np.linspace(0, 12, 51)) * np.linspace(0, 3, 51))
        p = sde_problem(Coefficients.constant(), H=H, L=-1, U=1, steps=50)
        sol, trace = picard_solve(p)
        assert trace.iterations == 2 and trace.residuals[1] == 0.0
        ref = solve_spr_separated(SprProblem(H, p.barriers, p.tol))
        assert np.array_equal(sol.X.values, ref.X.values)
        assert np.array_equal(sol.K.plus.values, ref.K.plus.values)

    def test_deterministic_decay_matches_clamped_euler(self):
        steps = 200
        p = sde_problem(Coefficients.linear_drift(slope=-1.0), steps=steps, H=0.5, L=0.0, U=1.0)
        sol, trace = picard_solve(p)
        # independent oracle: explicit Euler step followed by a clamp
        dt = 1.0 / steps
        x = [0.5]
        for _ in range(steps):
            x.append(min(1.0, max(0.0, x[-1] - x[-1] * dt)))
        assert np.allclose(sol.X.values, x, atol=1e-12)
        assert np.all(sol.K.plus.values == 0) and np.all(sol.K.minus.values == 0)
        assert sol.X.values[-1] == pytest.approx(0.5 * math.exp(-1), rel=5e-3)

    def test_constant_sigma_converges(self):
        p = sde_problem(Coefficients.constant(sigma=0.2), seed=4)
        sol, trace = picard_solve(p)
        assert trace.converged and sol.report.passed
        assert trace.residuals[1] == 0.0

    def test_ou_ratios_decrease(self):
        p = sde_problem(Coefficients.ou(sigma=0.5, theta=1.0), steps=256, seed=2)
        sol, trace = picard_solve(p)
        assert trace.converged and sol.report.passed
        ratios = trace.ratios
        assert all(r < 1 for r in ratios[2:])

    def test_non_convergence(self):
        p = sde_problem(Coefficients.ou(sigma=0.5, theta=1.0), max_iterations=2)
        with pytest.raises(PicardNotConverged) as exc:
            picard_solve(p)
        assert exc.value.trace.iterations == 2 and not exc.value.trace.converged
        assert exc.value.trace.residuals[-1] > p.tol_fixed_point

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_uniqueness_from_different_starts(self, seed):
        p = sde_problem(Coefficients.ou(sigma=0.8, theta=2.0, mean=0.3), steps=256, H=0.2, seed=seed)
        a, _ = picard_solve(p)
        b, _ = picard_solve(p, x0=clamp(p.H, p.L, p.U))
        rng = np.random.default_rng(seed)
        c, _ = picard_solve(p, x0=GridPath(p.grid, rng.uniform(-1, 1, len(p.grid))))
        assert sup_distance(a.X, b.X) <= 10 * p.tol_fixed_point
        assert sup_distance(a.X, c.X) <= 10 * p.tol_fixed_point

    def test_support_property(self):
        p = sde_problem(Coefficients.gbm_like(sigma=1.5, mu=0.5), H=0.5, L=0.2, U=1.0, steps=256, seed=7)
        sol, _ = picard_solve(p)
        assert sol.report.passed
        assert sol.report.support_plus <= 1e-10 and sol.report.support_minus <= 1e-10

    def test_integral_equation_residual(self):
        p = sde_problem(Coefficients.ou(sigma=0.5, theta=1.0), steps=256, seed=3)
        sol, _ = picard_solve(p)
        rhs = euler_integrals(sol.X, p) + sol.K.plus - sol.K.minus
        assert sup_distance(sol.X, rhs) <= 10 * p.tol_fixed_point


class TestContractionReport:
    def test_exact_case(self):
        rep = contraction_report(PicardTrace([0.7, 0.0, 0.0], converged=True), lam=0.0, T=1.0)
        assert rep.exact

    def test_linear_growth(self):
        p = sde_problem(Coefficients.linear_drift(slope=1.0), H=0.1, L=-1, U=1, steps=256)
        _, trace = picard_solve(p)
        rep = contraction_report(trace, lam=1.0, T=1.0)
        assert not rep.exact
        assert rep.ratios[-1] < 1 and all(r < 1 for r in rep.ratios[3:])
        assert rep.dominated and rep.rho > 0

    def test_too_short(self):
        with pytest.raises(ValueError):
            contraction_report(PicardTrace([1.0, 0.0]), lam=1, T=1)


class TestMonteCarlo:
    def test_single_path_equals_picard(self):
        p = sde_problem(Coefficients.ou(sigma=0.3, theta=1.0), steps=64)
        stats = monte_carlo(p, 1, seed=5)
        sol, trace = picard_solve(replace(p, brownian=sample_brownian(p.grid, path_seed(5, 0))))
        assert np.array_equal(stats.mean, sol.X.values)
        assert np.all(stats.variance == 0)
        assert stats.iterations == [trace.iterations]

    def test_deterministic_driver_zero_variance(self):
        p = sde_problem(Coefficients.constant(), H=0.1, steps=32)
        stats = monte_carlo(p, 20, seed=1)
        assert np.all(stats.variance == 0)

    def test_failures_counted(self):
        p = sde_problem(Coefficients.ou(sigma=0.5), steps=32, max_iterations=2)
        stats = monte_carlo(p, 5, seed=1)
        assert stats.failures == 5

    def test_workers_do_not_change_results(self):
        p = sde_problem(Coefficients.ou(sigma=0.4, theta=1.0), steps=32)
        a = monte_carlo(p, 12, seed=3)
        b = monte_carlo(p, 12, seed=3, workers=3)
        assert np.array_equal(a.mean, b.mean) and np.array_equal(a.variance, b.variance)

    @pytest.mark.slow
    def test_unreflected_baseline(self):
        p = sde_problem(Coefficients.constant(sigma=1.0), L=-1e6, U=1e6, steps=16)
        stats = monte_carlo(p, 10_000, seed=11)
        se = math.sqrt(1 / 10_000)
        assert abs(stats.mean[-1]) <= 4 * se
        assert stats.variance[-1] == pytest.approx(1.0, rel=0.05)
