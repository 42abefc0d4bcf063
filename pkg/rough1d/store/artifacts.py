"""Readers and writers for path, area and report artifacts.

Artifacts carry no timestamps: identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from rough1d.engine.levy_area import LevyArea, external_area
from rough1d.engine.paths import PathGrid
from rough1d.errors import ArtifactError, GridAlignmentError

SCHEMA_VERSION = 1


def write_text_atomic(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    try:
        with tmp_path.open("w", encoding="utf-8", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}") from e
    return path


def plain(value: Any) -> Any:
    """Convert numpy scalars, enums, tuples and paths into JSON-ready values."""

    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def csv_cell(value: Any) -> str:
    value = plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    if isinstance(value, list | dict):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


@dataclass
class Report:
    """A run result: metadata, scalar values and an optional table."""

    meta: dict[str, Any]
    values: dict[str, Any] = field(default_factory=dict)
    columns: tuple[str, ...] = ()
    rows: list[Sequence[Any]] = field(default_factory=list)


def _meta_lines(meta: Mapping[str, Any]) -> list[str]:
    return [f"# {k}={csv_cell(meta[k])}" for k in sorted(meta)]


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    for line in _meta_lines(report.meta):
        buf.write(line + "\n")

    writer = csv.writer(buf, lineterminator="\n")
    if report.columns:
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([csv_cell(v) for v in row])
        for key in sorted(report.values):
            buf.write(f"# {key}={csv_cell(report.values[key])}\n")
    else:
        keys = sorted(report.values)
        writer.writerow(keys)
        if keys:
            writer.writerow([csv_cell(report.values[k]) for k in keys])
    return buf.getvalue()


def render_json(report: Report) -> str:
    body: dict[str, Any] = {"meta": plain(report.meta), **plain(report.values)}
    if report.columns:
        body["columns"] = list(report.columns)
        body["rows"] = plain([list(r) for r in report.rows])
    return json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def emit_report(report: Report, fmt: str, path: Path | None = None) -> str:
    """Render the report as csv or json; write it atomically when a path is given."""

    if fmt == "csv":
        text = render_csv(report)
    elif fmt == "json":
        text = render_json(report)
    else:
        raise ArtifactError(f"unknown output format {fmt!r}; expected csv or json")
    if path is not None:
        write_text_atomic(path, text)
    return text


# -- paths and areas ----------------------------------------------------------


def _data_rows(path: Path) -> list[list[str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"cannot read {path}: {e}") from e
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    rows = [[c.strip() for c in row] for row in csv.reader(lines)]
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    return rows


def read_path_csv(path: Path) -> PathGrid:
    """Read a ``t,value`` CSV sampled at t_i = i / n_cells."""

    rows = _data_rows(path)
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows], dtype=float)
    except (ValueError, IndexError) as e:
        raise ArtifactError(f"{path}: expected numeric t,value rows ({e})") from e
    if data.shape[0] < 2:
        raise ArtifactError(f"{path}: a path needs at least two samples")

    n = data.shape[0] - 1
    expected = np.arange(n + 1) / n
    if not np.allclose(data[:, 0], expected, rtol=0.0, atol=1e-9):
        raise GridAlignmentError(f"{path}: times are not the uniform grid i/{n} on [0, 1]")
    return PathGrid(n, data[:, 1], label=path.name)


def render_path_csv(grid: PathGrid, meta: Mapping[str, Any] | None = None) -> str:
    buf = io.StringIO()
    for line in _meta_lines(meta or {}):
        buf.write(line + "\n")
    buf.write("t,value\n")
    for t, v in zip(grid.times, grid.values):
        buf.write(f"{csv_cell(float(t))},{csv_cell(float(v))}\n")
    return buf.getvalue()


def write_path_csv(path: Path, grid: PathGrid, meta: Mapping[str, Any] | None = None) -> Path:
    return write_text_atomic(path, render_path_csv(grid, meta))


def read_area_csv(path: Path, n_cells: int) -> LevyArea:
    """Read an external area declared as ``s,t,k,value`` rows on grid times."""

    entries: dict[tuple[int, int, int], float] = {}
    for row in _data_rows(path):
        try:
            s, t, k, value = float(row[0]), float(row[1]), int(row[2]), float(row[3])
        except (ValueError, IndexError) as e:
            raise ArtifactError(f"{path}: expected s,t,k,value rows ({e})") from e
        if k < 0:
            raise ArtifactError(f"{path}: negative order k={k}")
        entries[(_grid_index(s, n_cells, path), _grid_index(t, n_cells, path), k)] = value
    if not entries:
        raise ArtifactError(f"{path}: no area entries")
    return external_area(entries, n_cells, label=path.name)


def _grid_index(t: float, n_cells: int, path: Path) -> int:
    scaled = t * n_cells
    i = round(scaled)
    if abs(scaled - i) > 1e-9 * max(1.0, abs(scaled)) or not 0 <= i <= n_cells:
        raise GridAlignmentError(f"{path}: t={t} is not a grid point of a {n_cells}-cell grid")
    return int(i)
