"""Shared constructors and hypothesis strategies for the test suite."""
import numpy as np
from hypothesis import strategies as st

from skorokhod.instances import GeneratorSpec, generate_instance
from skorokhod.paths import GridPath, TimeGrid
from skorokhod.spr import SprProblem


def path(values, grid=None):
    values = np.asarray(values, dtype=float)
    if grid is None:
        grid = TimeGrid.uniform(1.0, values.size - 1)
    return GridPath(grid, values)


def problem(Y, L, U, tol=1e-12):
    Y = path(Y)
    g = Y.grid
    L = GridPath.constant(g, L) if np.isscalar(L) else path(L, g)
    U = GridPath.constant(g, U) if np.isscalar(U) else path(U, g)
    return SprProblem.from_paths(Y, L, U, tol)


@st.composite
def spr_instances(draw, max_steps=60, gap_min=0.01):
    seed = draw(st.integers(0, 2**32 - 1))
    steps = draw(st.integers(1, max_steps))
    lo = draw(st.floats(gap_min, 1.0))
    hi = draw(st.floats(lo, 2.0))
    variation = draw(st.floats(0.0, 20.0))
    spec = GeneratorSpec(steps=steps, gap_min=lo, gap_max=hi, variation=variation)
    return generate_instance(seed, spec)
