from __future__ import annotations

from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any

from rough1d import __version__
from rough1d.engine.functions import SmoothFunction, resolve_function
from rough1d.engine.levy_area import (
    Curve,
    LevyArea,
    area_from_primitive,
    candidate_area,
    pl_area,
    zero_area,
)
from rough1d.engine.paths import FORMULAS, PathGrid, gen_fbm, sample_smooth
from rough1d.errors import UnknownFormulaError, ValidationError
from rough1d.store import Report, emit_report, read_area_csv, read_path_csv

TOOL_NAME = "rough1d"


def now() -> datetime:
    return datetime.now().astimezone()


def parse_fraction(text: Any) -> Fraction:
    """'1/64', '0.25' or a number, as an exact fraction."""

    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"not a number or fraction: {text!r}") from e


def _parse_value(key: str, raw: str) -> Any:
    raw = raw.strip()
    if key == "coeffs":
        return tuple(float(c) for c in raw.split(";") if c.strip())
    if key == "breakpoints":
        pairs = []
        for item in raw.split(";"):
            t, v = item.split("/")
            pairs.append((float(t), float(v)))
        return tuple(pairs)
    if key in ("seed", "n"):
        return int(raw)
    return float(raw)


def parse_spec(spec: str) -> tuple[str, dict[str, Any]]:
    """'name:k=v,k=v' -> (name, params). List values use ';' separators."""

    name, _, rest = spec.partition(":")
    params: dict[str, Any] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UnknownFormulaError(f"expected key=value in {spec!r}, got {item!r}")
        try:
            params[key.strip()] = _parse_value(key.strip(), value)
        except ValueError as e:
            raise UnknownFormulaError(f"bad value for {key!r} in {spec!r}: {e}") from e
    return name.strip().lower(), params


def parse_fbm_flag(text: str) -> PathGrid:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise ValidationError(f"--fbm expects H,N,SEED, got {text!r}")
    try:
        hurst, n, seed = float(parts[0]), int(parts[1]), int(parts[2])
    except ValueError as e:
        raise ValidationError(f"--fbm expects H,N,SEED, got {text!r}") from e
    return gen_fbm(hurst, n, seed)


def resolve_path(spec: str, n_cells: int) -> PathGrid:
    """An existing CSV file, 'fbm:hurst=..,seed=..[,n=..]' or a formula[:k=v,...]."""

    candidate = Path(spec)
    if candidate.suffix.lower() == ".csv" or candidate.exists():
        return read_path_csv(candidate)

    name, params = parse_spec(spec)
    if name == "fbm":
        try:
            hurst = float(params.pop("hurst"))
        except KeyError:
            raise ValidationError(f"fbm path needs hurst=..: {spec!r}") from None
        seed = int(params.pop("seed", 0))
        n = int(params.pop("n", n_cells))
        if params:
            raise ValidationError(f"unknown fbm parameters: {', '.join(sorted(params))}")
        return gen_fbm(hurst, n, seed)
    if name not in FORMULAS:
        raise UnknownFormulaError(
            f"unknown path {spec!r}: not a file; formulas: fbm, {', '.join(sorted(FORMULAS))}"
        )
    return sample_smooth(name, n_cells, **params)


def driver_path(params: dict[str, Any], n_cells: int, key: str = "driver") -> PathGrid:
    if params.get("fbm"):
        return parse_fbm_flag(params["fbm"])
    return resolve_path(str(params[key]), n_cells)


def build_curve(
    params: dict[str, Any], n_cells: int
) -> tuple[Curve, SmoothFunction | None]:
    """Curve from --path-x/--fbm and --path-y or --h; returns h when y = h(x)."""

    x = driver_path(params, n_cells, key="path_x")
    if params.get("h") and params.get("path_y"):
        raise ValidationError("give either --path-y or --h, not both")
    if params.get("h"):
        h = resolve_function(str(params["h"]))
        return Curve.from_function(x, h), h
    if params.get("path_y"):
        y = resolve_path(str(params["path_y"]), x.n_cells)
        return Curve(x, y), None
    raise ValidationError("need --path-y or --h to define y")


def build_area(
    kind: str, curve: Curve, h: SmoothFunction | None, order: int, m: int = 1
) -> LevyArea:
    key = str(kind).strip()
    if key == "pl":
        return pl_area(curve, order)
    if key == "zero":
        return zero_area(curve.n_cells, order)
    if key == "primitive":
        if h is None:
            raise ValidationError("--area primitive needs --h")
        return area_from_primitive(curve.x, h, h.primitive)
    if key == "candidate":
        if h is None:
            raise ValidationError("--area candidate needs --h")
        return candidate_area(curve.x, h, m)
    path = Path(key)
    if path.exists():
        return read_area_csv(path, curve.n_cells)
    raise UnknownFormulaError(
        f"unknown area {kind!r}; expected primitive, pl, zero, candidate or a CSV file"
    )


def report_meta(run) -> dict[str, Any]:
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": run.command,
        "config": run.resolved(),
    }


def new_report(run, **kwargs) -> Report:
    return Report(meta=report_meta(run), **kwargs)


def write_output(run, report: Report) -> None:
    text = emit_report(report, run.format, run.output_path)
    if run.output_path is None:
        print(text, end="")
