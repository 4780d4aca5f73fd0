"""Right-continuous step paths on a finite time grid.

A ``GridPath`` holds one value per grid point; the path equals ``values[k]``
on ``[t_k, t_{k+1})``.  Left limits, jumps, discrete Stieltjes sums and
sup distances are exact for such paths.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

DEFAULT_TOL = 1e-12


class GridMismatchError(ValueError):
    """Two paths that must share a grid do not."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing time points ``0 = t_0 < ... < t_N = T``."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if pts[0] != 0.0:
            raise ValueError(f"grid must start at 0, got {pts[0]!r}")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> "TimeGrid":
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        pts = np.linspace(0.0, horizon, steps + 1)
        pts[-1] = horizon
        return cls(pts)

    @property
    def horizon(self) -> float:
        return float(self.points[-1])

    @property
    def steps(self) -> int:
        """Number of intervals N (the grid has N + 1 points)."""
        return self.points.size - 1

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return self is other or (
            self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def __hash__(self) -> int:
        return hash(self.points.tobytes())


def check_same_grid(*paths: "GridPath") -> TimeGrid:
    """Return the common grid of ``paths`` or raise ``GridMismatchError``.

    Grids with identical points are treated as the same grid; no resampling
    happens here.
    """
    grid = paths[0].grid
    for p in paths[1:]:
        if p.grid is not grid and p.grid != grid:
            raise GridMismatchError("paths live on different grids")
    return grid


@dataclass(frozen=True, eq=False)
class GridPath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != self.grid.points.shape:
            raise ValueError(
                f"expected {len(self.grid)} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("path values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: TimeGrid, value: float) -> "GridPath":
        return cls(grid, np.full(len(grid), float(value)))

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def _binary(self, other, op) -> "GridPath":
        if isinstance(other, GridPath):
            check_same_grid(self, other)
            return GridPath(self.grid, op(self.values, other.values))
        return GridPath(self.grid, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return GridPath(self.grid, float(other) - self.values)

    def __neg__(self):
        return GridPath(self.grid, -self.values)

    def __mul__(self, c: float):
        return GridPath(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def left_limits(self) -> np.ndarray:
        """Vector of left limits; ``X_{0-}`` is taken equal to ``X_0``."""
        return np.concatenate(([self.values[0]], self.values[:-1]))

    def jumps(self) -> np.ndarray:
        """``values[k] - left_limit(k)``; the first entry is always 0."""
        return self.values - self.left_limits()

    def is_nondecreasing(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def __repr__(self) -> str:
        return f"GridPath(N={self.grid.steps}, T={self.grid.horizon:g}, values={self.values!r})"


@dataclass(frozen=True, eq=False)
class BoundedVariationPath:
    """A path ``K = K⁺ − K⁻`` carried with its increasing parts."""

    plus: GridPath
    minus: GridPath
    tol: float = DEFAULT_TOL
    check: bool = True  # False admits unvalidated parts, e.g. a solution read for verification

    def __post_init__(self):
        check_same_grid(self.plus, self.minus)
        if not self.check:
            return
        for name, part in (("plus", self.plus), ("minus", self.minus)):
            if part.values[0] != 0.0:
                raise ValueError(f"K{name} must vanish at time 0")
            if not part.is_nondecreasing(self.tol):
                raise ValueError(f"K{name} must be nondecreasing")
        overlap = (np.diff(self.plus.values) > self.tol) & (
            np.diff(self.minus.values) > self.tol
        )
        if np.any(overlap):
            k = int(np.argmax(overlap)) + 1
            raise ValueError(f"K+ and K- both increase at grid index {k}")

    @classmethod
    def from_path(cls, K: GridPath, tol: float = DEFAULT_TOL) -> "BoundedVariationPath":
        """Minimal Jordan decomposition of a step path with ``K_0 = 0``."""
        if K.values[0] != 0.0:
            raise ValueError("K must vanish at time 0")
        dk = np.diff(K.values)
        plus = np.concatenate(([0.0], np.cumsum(np.maximum(dk, 0.0))))
        minus = np.concatenate(([0.0], np.cumsum(np.maximum(-dk, 0.0))))
        return cls(GridPath(K.grid, plus), GridPath(K.grid, minus), tol)

    @classmethod
    def zero(cls, grid: TimeGrid) -> "BoundedVariationPath":
        z = GridPath.constant(grid, 0.0)
        return cls(z, z)

    @property
    def grid(self) -> TimeGrid:
        return self.plus.grid

    @property
    def path(self) -> GridPath:
        return self.plus - self.minus


def left_limit(p: GridPath, k: int) -> float:
    n = len(p)
    if not 0 <= k < n:
        raise IndexError(f"grid index {k} out of range [0, {n - 1}]")
    return float(p.values[k - 1] if k > 0 else p.values[0])


def stieltjes_sum(f: GridPath, K: GridPath, tol: float = 0.0) -> float:
    """Discrete ``∫_0^T f dK`` for an increasing step path ``K``.

    Each increment ``K_k − K_{k−1}`` is charged with ``f_k``, the value at
    the jump time.
    """
    check_same_grid(f, K)
    dk = np.diff(K.values)
    if np.any(dk < -tol):
        raise ValueError("integrator must be nondecreasing")
    return float(np.dot(f.values[1:], dk))


def stieltjes_cumsum(f: GridPath, K: GridPath) -> np.ndarray:
    """Running values ``∫_0^{t_k} f dK`` for every grid index ``k``."""
    check_same_grid(f, K)
    return np.concatenate(([0.0], np.cumsum(f.values[1:] * np.diff(K.values))))


def total_variation(K: BoundedVariationPath) -> float:
    return float(K.plus.values[-1] + K.minus.values[-1])


def sup_distance(p: GridPath, q: GridPath) -> float:
    check_same_grid(p, q)
    return float(np.max(np.abs(p.values - q.values)))


def resample(p: GridPath, grid: TimeGrid) -> GridPath:
    """Evaluate the step path ``p`` at the points of another grid.

    Points past ``p``'s horizon take its terminal value.
    """
    idx = np.searchsorted(p.grid.points, grid.points, side="right") - 1
    return GridPath(grid, p.values[np.clip(idx, 0, len(p) - 1)])


def clamp(p: GridPath, lower: GridPath, upper: GridPath) -> GridPath:
    check_same_grid(p, lower, upper)
    return GridPath(p.grid, np.minimum(upper.values, np.maximum(lower.values, p.values)))


# -- CSV I/O ---------------------------------------------------------------

def format_float(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def read_path_csv(path: str | Path, grid: TimeGrid | None = None) -> GridPath:
    """Read a ``t,value`` CSV.  With ``grid`` given, times must match it."""
    times, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["t", "value"]:
            raise ValueError(f"{path}: expected header 't,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            t, v = float(row[0]), float(row[1])
            if not (math.isfinite(t) and math.isfinite(v)):
                raise ValueError(f"{path}:{lineno}: non-finite number")
            times.append(t)
            values.append(v)
    if len(times) < 2:
        raise ValueError(f"{path}: need at least two rows")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"{path}: times must be strictly increasing")
    file_grid = TimeGrid(np.array(times))
    if grid is not None:
        if file_grid != grid:
            raise GridMismatchError(f"{path}: times do not match the expected grid")
        file_grid = grid
    return GridPath(file_grid, np.array(values))


def csv_rows(grid: TimeGrid, columns: Iterable[np.ndarray]) -> list[list[str]]:
    cols = [grid.points, *columns]
    return [[format_float(c[k]) for c in cols] for k in range(len(grid))]
