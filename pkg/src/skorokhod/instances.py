"""Seeded random SPR instances for fuzzing and property tests."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .paths import DEFAULT_TOL, GridPath, TimeGrid
from .spr import SprProblem


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of the random-instance generator.

    ``variation`` is the total variation budget of the driver ``Y``; the
    lower barrier is a random walk of total variation ``barrier_variation``
    and ``U = L + gap`` with the gap drawn pointwise from
    ``[gap_min, gap_max]``.
    """

    steps: int = 200
    horizon: float = 1.0
    gap_min: float = 0.05
    gap_max: float = 1.0
    variation: float = 10.0
    barrier_variation: float = 2.0
    require_h1: bool = True
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.gap_min > self.gap_max:
            raise ValueError("gap_min must not exceed gap_max")
        if self.gap_min < 0:
            raise ValueError("gap_min must be nonnegative")
        if self.require_h1 and self.gap_min <= 0:
            raise ValueError("completely separated barriers need gap_min > 0")
        if self.variation < 0 or self.barrier_variation < 0:
            raise ValueError("variation budgets must be nonnegative")


def _walk(rng: np.random.Generator, steps: int, budget: float) -> np.ndarray:
    inc = rng.standard_normal(steps)
    tv = np.abs(inc).sum()
    if tv > 0:
        inc *= budget / tv
    return np.concatenate(([0.0], np.cumsum(inc)))


def generate_instance(seed: int, spec: GeneratorSpec = GeneratorSpec()) -> SprProblem:
    """Deterministic instance for ``seed`` with ``L_0 <= Y_0 <= U_0``."""
    rng = np.random.default_rng(seed)
    grid = TimeGrid.uniform(spec.horizon, spec.steps)
    L = _walk(rng, spec.steps, spec.barrier_variation) + rng.uniform(-1.0, 1.0)
    gap = rng.uniform(spec.gap_min, spec.gap_max, spec.steps + 1)
    U = L + gap
    y0 = L[0] + rng.uniform(0.0, 1.0) * gap[0]
    Y = y0 + _walk(rng, spec.steps, spec.variation)
    return SprProblem.from_paths(GridPath(grid, Y), GridPath(grid, L), GridPath(grid, U), spec.tol)


def fingerprint(*paths: GridPath) -> str:
    """SHA-256 over grid points and values of the given paths."""
    h = hashlib.sha256()
    for p in paths:
        h.update(p.grid.points.tobytes())
        h.update(p.values.tobytes())
    return h.hexdigest()
