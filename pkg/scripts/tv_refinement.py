"""Mean and second moment of the compensator variation under grid refinement."""
import argparse
import time

from skorokhod.paths import GridPath, TimeGrid
from skorokhod.sde import Coefficients, SdeProblem, monte_carlo
from skorokhod.separation import BarrierPair

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--paths", type=int, default=10_000)
parser.add_argument("--seed", type=int, default=777)
parser.add_argument("--sigma", type=float, default=1.0)
parser.add_argument("--gap", type=float, default=1.0, help="barriers sit at -gap and +gap")
parser.add_argument("--steps", type=int, nargs="+", default=[32, 64, 128, 256, 512])
parser.add_argument("--workers", type=int, default=1)
args = parser.parse_args()

print(f"{'N':>6} {'E[TV]':>10} {'E[TV^2]':>10} {'Var X_T':>10} {'sec':>6}")
for steps in args.steps:
    g = TimeGrid.uniform(1.0, steps)
    template = SdeProblem(
        GridPath.constant(g, 0.0), Coefficients.constant(sigma=args.sigma),
        BarrierPair(GridPath.constant(g, -args.gap), GridPath.constant(g, args.gap)),
    )
    t0 = time.perf_counter()
    s = monte_carlo(template, args.paths, args.seed, workers=args.workers)
    print(f"{steps:>6} {s.mean_total_variation:10.5f} {s.total_variation_second_moment:10.5f} "
          f"{s.variance[-1]:10.5f} {time.perf_counter() - t0:6.1f}")
