from __future__ import annotations

import os
import sys
from collections.abc import Mapping
from dataclasses import fields
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 backport
    import tomli as tomllib

from rough1d.engine.types import Config
from rough1d.errors import ConfigError
from rough1d.store.paths import get_config_path

THREADS_ENV = "ROUGH1D_THREADS"


def default_config_toml(config: Config | None = None) -> str:
    cfg = config or Config()
    return (
        "# rough1d configuration\n"
        "# Location: ~/.config/rough1d/config.toml (or XDG_CONFIG_HOME)\n"
        "# Command-line flags override these; other keys set command parameters.\n"
        "\n"
        f"tol = {cfg.tol!r}\n"
        f"max_iter = {cfg.max_iter}\n"
        f"pair_budget = {cfg.pair_budget}\n"
        f"audit_triples = {cfg.audit_triples}\n"
        f"audit_seed = {cfg.audit_seed}\n"
        f"audit_tol = {cfg.audit_tol!r}\n"
        f"flow_step = {cfg.flow_step!r}\n"
        f"n_cells = {cfg.n_cells}\n"
        f"working_radius = {cfg.working_radius!r}\n"
        f"threads = {cfg.threads}\n"
        f"log_runs = {str(cfg.log_runs).lower()}\n"
    )


def ensure_default_config_file(path: Path | None = None) -> Path:
    config_path = path or get_config_path()
    config_path.parent.mkdir(parents=True, exist_ok=True)
    if not config_path.exists():
        config_path.write_text(default_config_toml(), encoding="utf-8")
    return config_path


def _coerce(key: str, value: Any, default: Any) -> Any:
    # bool is an int subclass; keep the two apart.
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, int | float) and not isinstance(value, bool):
            return float(value)
    raise ConfigError(f"config key {key!r} expects {type(default).__name__}, got {value!r}")


def apply_settings(cfg: Config, raw: Mapping[str, Any]) -> dict[str, Any]:
    """Copy recognised settings into cfg; return the remaining keys untouched."""

    known = {f.name for f in fields(cfg)}
    rest: dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(f"config tables are not supported: [{key}]")
        if key in known:
            setattr(cfg, key, _coerce(key, value, getattr(cfg, key)))
        else:
            rest[key] = value

    if cfg.tol <= 0:
        raise ConfigError(f"tol must be > 0, got {cfg.tol}")
    if cfg.max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {cfg.max_iter}")
    if cfg.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg.threads}")
    if cfg.n_cells < 1:
        raise ConfigError(f"n_cells must be >= 1, got {cfg.n_cells}")
    if cfg.flow_step <= 0:
        raise ConfigError(f"flow_step must be > 0, got {cfg.flow_step}")
    return rest


def apply_environment(cfg: Config, environ: Mapping[str, str] | None = None) -> None:
    env = os.environ if environ is None else environ
    raw = env.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {threads}")
    cfg.threads = threads


def load_config(
    path: Path | None = None, *, create_if_missing: bool = False
) -> tuple[Config, dict]:
    """Load config.toml, returning (Config, meta).

    ``meta["parameters"]`` holds keys that are not settings; the CLI matches them
    against the invoked command's parameters. A missing file at the default
    location yields the defaults; a missing explicit file is an error.
    """

    config_path = path or get_config_path()
    meta: dict = {"path": str(config_path), "loaded": False, "created": False, "parameters": {}}

    if create_if_missing:
        before = config_path.exists()
        ensure_default_config_file(config_path)
        meta["created"] = not before

    if not config_path.exists():
        if path is not None:
            raise ConfigError(f"config file not found: {config_path}")
        return Config(), meta

    try:
        raw = tomllib.loads(config_path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read config {config_path}: {e}") from e

    cfg = Config()
    meta["parameters"] = apply_settings(cfg, raw)
    meta["loaded"] = True
    return cfg, meta
