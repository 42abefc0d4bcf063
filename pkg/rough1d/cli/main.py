from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from rough1d.engine.types import Config
from rough1d.errors import ConfigError, Rough1DError, exit_status
from rough1d.store import RunLogger, apply_environment, load_config

COMMANDS = (
    "gen-path",
    "weights",
    "area-check",
    "integrate",
    "converge",
    "solve",
    "oracle",
    "compare",
)

# Per-command parameter defaults. Flags left unset fall back to config-file entries,
# then to these values.
_PATH_DEFAULTS: dict[str, Any] = {"path_x": "sine", "path_y": None, "h": None, "fbm": None}
_RDE_DEFAULTS: dict[str, Any] = {
    "sigma": "2+sin",
    "b": "cos",
    "y0": 0.5,
    "beta": 0.34,
    "driver": "sine",
    "fbm": None,
}
PARAMETER_DEFAULTS: dict[str, dict[str, Any]] = {
    "gen-path": {"path": "sine", "fbm": None},
    "weights": {"m": 1},
    "area-check": {**_PATH_DEFAULTS, "area": "pl", "order": 0, "m": 1, "beta": 0.34},
    "integrate": {
        **_PATH_DEFAULTS,
        "f": "identity",
        "area": "pl",
        "scheme": "corrected",
        "m": 1,
        "eps": "1/64",
        "level": None,
        "window": None,
    },
    "converge": {
        **_PATH_DEFAULTS,
        "f": "identity",
        "area": "pl",
        "m": 1,
        "ladder": None,
        "alpha": None,
    },
    "solve": {**_RDE_DEFAULTS, "init": "constant"},
    "oracle": dict(_RDE_DEFAULTS),
    "compare": dict(_RDE_DEFAULTS),
}

# Numeric parameters; the rest are formula, file or fraction strings.
_PARAMETER_TYPES: dict[str, type] = {
    "m": int,
    "order": int,
    "level": int,
    "y0": float,
    "beta": float,
    "alpha": float,
}

_SETTING_FLAGS = {
    "tol": float,
    "max_iter": int,
    "pair_budget": int,
    "audit_triples": int,
    "audit_seed": int,
    "audit_tol": float,
    "flow_step": float,
    "n_cells": int,
    "working_radius": float,
    "threads": int,
}


@dataclass
class RunConfig:
    command: str
    parameters: dict[str, Any] = field(default_factory=dict)
    output_path: Path | None = None
    format: str = "csv"
    settings: Config = field(default_factory=Config)
    config_meta: dict = field(default_factory=dict)

    def resolved(self) -> dict[str, Any]:
        """Settings and parameters as echoed into artifacts."""

        settings = {k: getattr(self.settings, k) for k in Config.keys() if k != "log_runs"}
        return {"settings": settings, "parameters": dict(sorted(self.parameters.items()))}


def coerce_parameters(command: str, params: dict[str, Any]) -> dict[str, Any]:
    """Parameters converted to the types the command handlers expect."""

    out = dict(params)
    for name, value in params.items():
        if value is None:
            continue
        kind = _PARAMETER_TYPES.get(name)
        try:
            if isinstance(value, bool):
                raise TypeError("boolean")
            if kind is not None:
                if kind is int and isinstance(value, float) and not value.is_integer():
                    raise TypeError("not an integer")
                out[name] = kind(value)
            elif name == "ladder" and isinstance(value, list):
                out[name] = ",".join(str(v) for v in value)
            elif name == "window":
                s, t = (float(v) for v in value)
                out[name] = (s, t)
            elif isinstance(value, (list, dict)):
                raise TypeError(type(value).__name__)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{command}: bad value for {name}: {value!r} ({e})") from e
    return out

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML config file")
    common.add_argument("--output", "-o", type=Path, default=None, help="Artifact path")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--no-log", action="store_true", help="Do not append to the run log")
    for name, kind in _SETTING_FLAGS.items():
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    return common


def _add_path_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--path-x", dest="path_x", default=None, help="CSV file or formula[:k=v,...]")
    p.add_argument("--path-y", dest="path_y", default=None, help="CSV file or formula")
    p.add_argument("--h", dest="h", default=None, help="y = h(x) for a catalogue function h")
    p.add_argument("--fbm", default=None, metavar="H,N,SEED", help="fBm sample as x")


def _add_rde_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", default=None)
    p.add_argument("--b", dest="b", default=None)
    p.add_argument("--y0", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--driver", default=None, help="CSV file or formula[:k=v,...]")
    p.add_argument("--fbm", default=None, metavar="H,N,SEED")


def _build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="rough1d")
    sub = parser.add_subparsers(dest="command", required=True)

    gen_p = sub.add_parser("gen-path", parents=[common], help="Sample a path on the grid")
    gen_p.add_argument("path", nargs="?", default=None, help="formula[:k=v,...] or fbm:hurst=..")
    gen_p.add_argument("--fbm", default=None, metavar="H,N,SEED")

    weights_p = sub.add_parser("weights", parents=[common], help="Print nu_m atoms and weights")
    weights_p.add_argument("--m", type=int, default=None)

    area_p = sub.add_parser("area-check", parents=[common], help="Audit a Lévy area")
    _add_path_flags(area_p)
    area_p.add_argument("--area", default=None, help="primitive | pl | zero | candidate | FILE")
    area_p.add_argument("--order", type=int, default=None)
    area_p.add_argument("--m", type=int, default=None)
    area_p.add_argument("--beta", type=float, default=None)

    integrate_p = sub.add_parser("integrate", parents=[common], help="One approximant value")
    _add_path_flags(integrate_p)
    integrate_p.add_argument("--f", dest="f", default=None, help="Integrand f")
    integrate_p.add_argument("--area", default=None)
    integrate_p.add_argument(
        "--scheme", choices=["rv", "nc", "corrected", "germ", "weighted"], default=None
    )
    integrate_p.add_argument("--m", type=int, default=None)
    integrate_p.add_argument("--eps", default=None, help="epsilon as 1/q or p/n")
    integrate_p.add_argument("--level", type=int, default=None, help="Dyadic level for germ")
    integrate_p.add_argument("--window", nargs=2, type=float, default=None, metavar=("S", "T"))

    converge_p = sub.add_parser("converge", parents=[common], help="Epsilon ladder and rate")
    _add_path_flags(converge_p)
    converge_p.add_argument("--f", dest="f", default=None)
    converge_p.add_argument("--area", default=None)
    converge_p.add_argument("--m", type=int, default=None)
    converge_p.add_argument("--ladder", default=None, help="Comma-separated epsilons")
    converge_p.add_argument("--alpha", type=float, default=None)

    solve_p = sub.add_parser("solve", parents=[common], help="Picard solver")
    _add_rde_flags(solve_p)
    solve_p.add_argument("--init", choices=["constant", "driver"], default=None)

    oracle_p = sub.add_parser("oracle", parents=[common], help="Doss–Sussmann solution")
    _add_rde_flags(oracle_p)

    compare_p = sub.add_parser("compare", parents=[common], help="Solver against oracle")
    _add_rde_flags(compare_p)

    return parser


def resolve(args: argparse.Namespace, environ: dict[str, str] | None = None) -> RunConfig:
    """flags > ROUGH1D_THREADS > config file > defaults."""

    command = args.command
    settings, meta = load_config(args.config)
    apply_environment(settings, environ)

    for name in _SETTING_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(settings, name, value)
    if args.no_log:
        settings.log_runs = False

    defaults = PARAMETER_DEFAULTS[command]
    file_params = meta.get("parameters", {})
    unknown = sorted(set(file_params) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")

    params = dict(defaults)
    params.update(file_params)
    for name in defaults:
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    params = coerce_parameters(command, params)

    return RunConfig(
        command=command,
        parameters=params,
        output_path=args.output,
        format=args.format or "csv",
        settings=settings,
        config_meta=meta,
    )


def run(config: RunConfig, logger: RunLogger | None = None) -> int:
    from rough1d.cli import area_check, common, gen_path, integrate, solve, weights

    handlers = {
        "gen-path": gen_path.main,
        "weights": weights.main,
        "area-check": area_check.main,
        "integrate": integrate.main,
        "converge": integrate.converge_main,
        "solve": solve.main,
        "oracle": solve.oracle_main,
        "compare": solve.compare_main,
    }
    if config.command not in COMMANDS:
        raise RuntimeError(f"Unknown command: {config.command}")
    handler = handlers[config.command]

    log = logger or RunLogger(enabled=config.settings.log_runs)
    log.log_start(when=common.now(), command=config.command, config=config.resolved())
    try:
        config.parameters = coerce_parameters(config.command, config.parameters)
        status = int(handler(config, log))
    except Rough1DError as e:
        status = exit_status(e)
        print(f"rough1d {config.command}: error: {e}", file=sys.stderr)
        log.log_error(when=common.now(), command=config.command, error=e)
    log.log_end(when=common.now(), command=config.command, status=status)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve(args)
    except Rough1DError as e:
        print(f"rough1d {args.command}: error: {e}", file=sys.stderr)
        return exit_status(e)
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
