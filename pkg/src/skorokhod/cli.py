"""Command-line entry point: ``skorokhod {spr,verify,gap,sde,mc,fuzz}``.

Exit codes: 0 success, 1 internal error, 2 verification failure or touching
barriers, 3 fixed-point non-convergence.  Diagnostics go to stderr as
``LEVEL key=value ...`` lines.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import SdeConfig
from .instances import GeneratorSpec, fingerprint, generate_instance
from .io import read_solution_csv, write_json, write_solution_csv
from .paths import DEFAULT_TOL, read_path_csv
from .sde import PicardNotConverged, contraction_report, monte_carlo, picard_solve, sample_brownian, path_seed
from .separation import BarrierPair, SeparationError, stationarity_index
from .spr import (
    SprProblem,
    solution_distance,
    solve_spr_alternating,
    solve_spr_discrete_oracle,
    verify_solution,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_NO_CONVERGENCE = 3


def emit(level: str, **fields) -> None:
    parts = [level]
    for k, v in fields.items():
        s = v if isinstance(v, str) else json.dumps(v)
        if isinstance(v, str) and (not s or any(c.isspace() or c in '"=' for c in s)):
            s = json.dumps(s)
        parts.append(f"{k}={s}")
    print(" ".join(parts), file=sys.stderr)


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    tol_eq3: float | None = None
    seed: int = 0
    paths: int = 1
    workers: int = 1
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    count: int = 100

    def validate(self) -> None:
        if not self.tol > 0 or (self.tol_eq3 is not None and not self.tol_eq3 > 0):
            raise ValueError("tolerances must be positive")
        if self.paths < 1 or self.count < 1 or self.workers < 1:
            raise ValueError("--paths, --count and --workers must be >= 1")
        for name, p in self.inputs.items():
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(f"--{name}: {p} does not exist")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        cmd = ns.command
        ins = {k: getattr(ns, k, None) for k in ("input", "lower", "upper", "solution", "config")}
        outs = {k: getattr(ns, k, None) for k in ("out", "report", "trace")}
        gen = GeneratorSpec()
        if cmd == "fuzz":
            gen = GeneratorSpec(
                steps=ns.steps, gap_min=ns.gap_min, gap_max=ns.gap_max,
                variation=ns.variation, tol=ns.tol,
            )
        return cls(
            subcommand=cmd,
            inputs={k: v for k, v in ins.items() if v is not None},
            outputs={k: v for k, v in outs.items() if v is not None},
            tol=getattr(ns, "tol", DEFAULT_TOL),
            tol_eq3=getattr(ns, "tol_eq3", None),
            seed=getattr(ns, "seed", 0),
            paths=getattr(ns, "paths", 1),
            workers=getattr(ns, "workers", 1),
            generator=gen,
            count=getattr(ns, "count", 100),
        )


def _load_problem(cfg: RunConfig) -> SprProblem:
    Y = read_path_csv(cfg.inputs["input"])
    L = read_path_csv(cfg.inputs["lower"], grid=Y.grid)
    U = read_path_csv(cfg.inputs["upper"], grid=Y.grid)
    return SprProblem.from_paths(Y, L, U, cfg.tol)


def _cmd_spr(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    problem = _load_problem(cfg)
    n_star = stationarity_index(problem.L, problem.U)
    # U^{n*} == U exactly, so the alternating solve runs on the input barriers
    sol, trace = solve_spr_alternating(problem)
    report = verify_solution(problem, sol, tol_eq3=cfg.tol_eq3)
    if "out" in cfg.outputs:
        write_solution_csv(cfg.outputs["out"], sol)
    if "report" in cfg.outputs:
        write_json(cfg.outputs["report"], {
            "residuals": report.as_dict(),
            "trace": trace.summary(),
            "gap": problem.barriers.gap,
            "stationarity_index": n_star,
            "fingerprint": fingerprint(problem.Y, problem.L, problem.U),
            "seconds": time.perf_counter() - t0,
        })
    emit("INFO", command="spr", passed=report.passed, crossings=trace.crossings,
         residual_eq1=report.residual_eq1, residual_eq2=report.residual_eq2)
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_verify(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    problem = _load_problem(cfg)
    sol = read_solution_csv(cfg.inputs["solution"], grid=problem.grid)
    report = verify_solution(problem, sol, tol_eq3=cfg.tol_eq3)
    if "report" in cfg.outputs:
        write_json(cfg.outputs["report"], {
            "residuals": report.as_dict(),
            "passed": report.passed,
            "fingerprint": fingerprint(problem.Y, problem.L, problem.U, sol.X),
            "seconds": time.perf_counter() - t0,
        })
    emit("INFO" if report.passed else "WARN", command="verify", passed=report.passed,
         **{k: v for k, v in report.as_dict().items() if k.startswith("residual")})
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_gap(cfg: RunConfig) -> int:
    L = read_path_csv(cfg.inputs["lower"])
    U = read_path_csv(cfg.inputs["upper"], grid=L.grid)
    pair = BarrierPair(L, U)
    n_star = stationarity_index(L, U) if pair.status == "H1" else None
    print(f"gap={pair.gap!r} status={pair.status} n_star={n_star}")
    return EXIT_OK if pair.status == "H1" else EXIT_FAIL


def _cmd_sde(cfg: RunConfig) -> int:
    sde_cfg = SdeConfig.load(cfg.inputs["config"])
    grid = sde_cfg.grid()
    problem = sde_cfg.problem(brownian=sample_brownian(grid, path_seed(cfg.seed, 0)))
    try:
        sol, trace = picard_solve(problem)
    except PicardNotConverged as exc:
        if "trace" in cfg.outputs:
            write_json(cfg.outputs["trace"], {"picard": exc.trace.as_dict()})
        emit("ERROR", command="sde", converged=False, iterations=exc.trace.iterations,
             residual=exc.trace.residuals[-1])
        return EXIT_NO_CONVERGENCE
    if "out" in cfg.outputs:
        write_solution_csv(cfg.outputs["out"], sol)
    if "trace" in cfg.outputs:
        payload = {"picard": trace.as_dict(), "residuals": sol.report.as_dict(), "seed": cfg.seed}
        if trace.iterations >= 3:
            payload["contraction"] = contraction_report(trace, problem.coefficients.lam, grid.horizon).as_dict()
        write_json(cfg.outputs["trace"], payload)
    emit("INFO", command="sde", converged=True, iterations=trace.iterations,
         residual=trace.residuals[-1], passed=sol.report.passed)
    return EXIT_OK if sol.report.passed else EXIT_FAIL


def _cmd_mc(cfg: RunConfig) -> int:
    sde_cfg = SdeConfig.load(cfg.inputs["config"])
    template = sde_cfg.problem()
    t0 = time.perf_counter()
    stats = monte_carlo(template, cfg.paths, cfg.seed, workers=cfg.workers)
    data = stats.as_dict()
    data["seconds"] = time.perf_counter() - t0
    if "out" in cfg.outputs:
        write_json(cfg.outputs["out"], data)
    else:
        print(json.dumps({k: v for k, v in data.items() if k not in ("t", "mean", "variance")}, indent=2))
    emit("INFO", command="mc", paths=cfg.paths, failures=stats.failures,
         terminal_variance=data["terminal_variance"])
    return EXIT_NO_CONVERGENCE if stats.failures else EXIT_OK


def _cmd_fuzz(cfg: RunConfig) -> int:
    worst_dist = worst_eq = 0.0
    failed = []
    for i in range(cfg.count):
        seed = cfg.seed + i
        problem = generate_instance(seed, cfg.generator)
        alt, _ = solve_spr_alternating(problem)
        orc = solve_spr_discrete_oracle(problem)
        d = solution_distance(alt, orc)
        reports = [verify_solution(problem, s, tol_eq3=cfg.tol_eq3) for s in (alt, orc)]
        worst_dist = max(worst_dist, d)
        worst_eq = max(worst_eq, *(max(r.residual_eq1, r.residual_eq2) for r in reports))
        if d > cfg.tol or not all(r.passed for r in reports):
            failed.append(seed)
    summary = {"count": cfg.count, "first_seed": cfg.seed, "failed_seeds": failed,
               "max_oracle_distance": worst_dist, "max_constraint_residual": worst_eq}
    if "report" in cfg.outputs:
        write_json(cfg.outputs["report"], summary)
    emit("INFO" if not failed else "WARN", command="fuzz", count=cfg.count,
         failures=len(failed), max_oracle_distance=worst_dist)
    return EXIT_OK if not failed else EXIT_FAIL


COMMANDS = {
    "spr": _cmd_spr,
    "verify": _cmd_verify,
    "gap": _cmd_gap,
    "sde": _cmd_sde,
    "mc": _cmd_mc,
    "fuzz": _cmd_fuzz,
}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return COMMANDS[cfg.subcommand](cfg)
    except SeparationError as exc:
        emit("ERROR", command=cfg.subcommand, error="touching", index=exc.index, message=str(exc))
        return EXIT_FAIL
    except Exception as exc:  # every other failure maps to the internal-error code
        emit("ERROR", command=cfg.subcommand, error=type(exc).__name__, message=str(exc))
        return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skorokhod", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def spr_inputs(p):
        p.add_argument("--input", required=True, help="driver Y as t,value CSV")
        p.add_argument("--lower", required=True, help="lower barrier CSV")
        p.add_argument("--upper", required=True, help="upper barrier CSV")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--tol-eq3", type=float, default=None,
                       help="tolerance for the complementarity residuals (default: --tol)")

    p = sub.add_parser("spr", help="solve the two-sided reflection problem")
    spr_inputs(p)
    p.add_argument("--out", help="solution CSV (t,X,Kplus,Kminus)")
    p.add_argument("--report", help="report JSON")

    p = sub.add_parser("verify", help="check a solution CSV against the defining conditions")
    spr_inputs(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--report")

    p = sub.add_parser("gap", help="separation gap, status and stationarity index")
    p.add_argument("--lower", required=True)
    p.add_argument("--upper", required=True)

    p = sub.add_parser("sde", help="solve one reflected SDE path by Picard iteration")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--trace")

    p = sub.add_parser("mc", help="Monte Carlo batch of reflected SDE paths")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="statistics JSON")

    p = sub.add_parser("fuzz", help="cross-check both solvers on random instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--gap-min", type=float, default=0.05)
    p.add_argument("--gap-max", type=float, default=1.0)
    p.add_argument("--variation", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--tol-eq3", type=float, default=None)
    p.add_argument("--report")
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
    except Exception as exc:
        emit("ERROR", command=ns.command, error=type(exc).__name__, message=str(exc))
        return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
