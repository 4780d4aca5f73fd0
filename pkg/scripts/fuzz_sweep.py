"""Cross-check the alternating solver against the clamping oracle over many seeds."""
import argparse
import time

from skorokhod.instances import GeneratorSpec, generate_instance
from skorokhod.spr import solution_distance, solve_spr_alternating, solve_spr_discrete_oracle

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--count", type=int, default=10_000)
parser.add_argument("--steps", type=int, default=200)
parser.add_argument("--gap-min", type=float, default=0.05)
parser.add_argument("--gap-max", type=float, default=1.0)
parser.add_argument("--variation", type=float, default=10.0)
args = parser.parse_args()

spec = GeneratorSpec(steps=args.steps, gap_min=args.gap_min, gap_max=args.gap_max, variation=args.variation)
t0 = time.perf_counter()
worst, crossings, failures = 0.0, 0, 0
for seed in range(args.count):
    p = generate_instance(seed, spec)
    alt, trace = solve_spr_alternating(p)
    orc = solve_spr_discrete_oracle(p)
    worst = max(worst, solution_distance(alt, orc))
    crossings = max(crossings, trace.crossings)
    failures += not (alt.report.passed and orc.report.passed)
print(f"{args.count} instances in {time.perf_counter() - t0:.1f} s")
print(f"max distance {worst:.3e}, max crossings {crossings}, verification failures {failures}")
