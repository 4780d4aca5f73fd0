"""File formats: path/solution CSVs and JSON reports, written atomically."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .paths import BoundedVariationPath, GridPath, TimeGrid, csv_rows, read_path_csv
from .spr import SprSolution

SOLUTION_HEADER = ["t", "X", "Kplus", "Kminus"]

__all__ = [
    "atomic_write_text",
    "read_path_csv",
    "read_solution_csv",
    "write_json",
    "write_path_csv",
    "write_solution_csv",
]


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_path_csv(path, p: GridPath) -> None:
    atomic_write_text(path, _csv_text(["t", "value"], csv_rows(p.grid, [p.values])))


def write_solution_csv(path, sol: SprSolution) -> None:
    cols = [sol.X.values, sol.K.plus.values, sol.K.minus.values]
    atomic_write_text(path, _csv_text(SOLUTION_HEADER, csv_rows(sol.X.grid, cols)))


def read_solution_csv(path, grid: TimeGrid | None = None) -> SprSolution:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:4] != SOLUTION_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SOLUTION_HEADER)}")
        rows = [[float(x) for x in row[:4]] for row in reader if row]
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: need at least two finite rows")
    file_grid = TimeGrid(data[:, 0])
    if grid is not None:
        if file_grid != grid:
            raise ValueError(f"{path}: times do not match the input grid")
        file_grid = grid
    K = BoundedVariationPath(
        GridPath(file_grid, data[:, 2]), GridPath(file_grid, data[:, 3]), check=False
    )
    return SprSolution(GridPath(file_grid, data[:, 1]), K)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, data: dict) -> None:
    atomic_write_text(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
