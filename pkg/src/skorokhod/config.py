"""JSON configuration for the ``sde`` and ``mc`` commands.

Example::

    {
      "schema": 1,
      "horizon": 1.0,
      "steps": 1024,
      "coefficients": {"name": "ou", "params": {"sigma": 0.2, "theta": 1.0}},
      "lower": {"constant": -1.0},
      "upper": {"csv": "upper.csv"},
      "H": {"constant": 0.0},
      "tol": 1e-12,
      "tol_fixed_point": 1e-10,
      "max_iterations": 50
    }

CSV paths are resolved relative to the config file.  A CSV path whose times
differ from the configured grid is resampled onto it as a step function.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .paths import DEFAULT_TOL, GridPath, TimeGrid, read_path_csv, resample
from .separation import BarrierPair
from .sde import Coefficients, SdeProblem, make_coefficients

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class SdeConfig:
    horizon: float = 1.0
    steps: int = 1024
    coefficients: dict = field(default_factory=lambda: {"name": "constant", "params": {}})
    lower: dict = field(default_factory=lambda: {"constant": -1.0})
    upper: dict = field(default_factory=lambda: {"constant": 1.0})
    H: dict = field(default_factory=lambda: {"constant": 0.0})
    tol: float = DEFAULT_TOL
    tol_fixed_point: float = 1e-10
    max_iterations: int = 50
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | str = ".") -> "SdeConfig":
        data = dict(data)
        schema = data.pop("schema", None)
        if schema != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema {schema!r}; expected {SCHEMA_VERSION}")
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data, base_dir=Path(base_dir))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "SdeConfig":
        path = Path(path)
        with open(path) as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    def validate(self) -> None:
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if not (self.tol > 0 and self.tol_fixed_point > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.horizon, int(self.steps))

    def _path(self, spec: dict, grid: TimeGrid, name: str) -> GridPath:
        if set(spec) == {"constant"}:
            return GridPath.constant(grid, float(spec["constant"]))
        if set(spec) == {"csv"}:
            p = read_path_csv(self.base_dir / spec["csv"])
            if p.grid != grid:
                log.info("resampling %s from %s onto the %d-step grid", name, spec["csv"], grid.steps)
                p = resample(p, grid)
            return GridPath(grid, p.values)
        raise ValueError(f"{name}: expected {{'constant': x}} or {{'csv': path}}, got {spec!r}")

    def make_coefficients(self) -> Coefficients:
        spec = dict(self.coefficients)
        name = spec.pop("name", None)
        params = spec.pop("params", {})
        if spec:
            raise ValueError(f"coefficients: unknown keys {sorted(spec)}")
        return make_coefficients(name, **params)

    def problem(self, brownian: GridPath | None = None) -> SdeProblem:
        grid = self.grid() if brownian is None else brownian.grid
        return SdeProblem(
            H=self._path(self.H, grid, "H"),
            coefficients=self.make_coefficients(),
            barriers=BarrierPair(self._path(self.lower, grid, "lower"), self._path(self.upper, grid, "upper")),
            brownian=brownian,
            tol_fixed_point=self.tol_fixed_point,
            max_iterations=int(self.max_iterations),
            tol=self.tol,
        )
