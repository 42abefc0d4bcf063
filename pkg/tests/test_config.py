from pathlib import Path
from tempfile import TemporaryDirectory

import pytest

from rough1d.engine.types import Config
from rough1d.errors import ConfigError
from rough1d.store.config import (
    apply_environment,
    apply_settings,
    default_config_toml,
    load_config,
)


def test_load_config_defaults_when_missing(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    cfg, meta = load_config()

    assert cfg == Config()
    assert meta["loaded"] is False
    assert meta["parameters"] == {}


def test_explicit_missing_file_is_an_error():
    with TemporaryDirectory() as tmp:
        with pytest.raises(ConfigError):
            load_config(Path(tmp) / "absent.toml")


def test_load_config_parses_values():
    with TemporaryDirectory() as tmp:
        path = Path(tmp) / "config.toml"
        path.write_text(
            "tol = 1e-7\n"
            "max_iter = 50\n"
            "n_cells = 2048\n"
            "flow_step = 1\n"
            "log_runs = false\n"
            "sigma = 'exp'\n"
            "eps = '1/32'\n",
            encoding="utf-8",
        )
        cfg, meta = load_config(path)

    assert meta["loaded"] is True
    assert cfg.tol == 1e-7
    assert cfg.max_iter == 50
    assert cfg.n_cells == 2048
    assert cfg.flow_step == 1.0 and isinstance(cfg.flow_step, float)
    assert cfg.log_runs is False
    assert meta["parameters"] == {"sigma": "exp", "eps": "1/32"}


def test_create_if_missing_round_trips_the_defaults():
    with TemporaryDirectory() as tmp:
        path = Path(tmp) / "nested" / "config.toml"
        cfg, meta = load_config(path, create_if_missing=True)
        text = path.read_text(encoding="utf-8")

    assert meta["created"] is True
    assert meta["loaded"] is True
    assert cfg == Config()
    assert text == default_config_toml()


@pytest.mark.parametrize(
    "raw",
    [
        {"max_iter": 2.5},
        {"max_iter": True},
        {"log_runs": 1},
        {"tol": "small"},
        {"tol": -1.0},
        {"threads": 0},
        {"flow_step": 0.0},
    ],
)
def test_bad_settings_are_rejected(raw):
    with pytest.raises(ConfigError):
        apply_settings(Config(), raw)


def test_tables_are_rejected():
    with pytest.raises(ConfigError):
        apply_settings(Config(), {"solve": {"tol": 1e-3}})


def test_unreadable_toml(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("tol = = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_threads_from_the_environment():
    cfg = Config()
    apply_environment(cfg, {"ROUGH1D_THREADS": "4"})
    assert cfg.threads == 4

    apply_environment(cfg, {"ROUGH1D_THREADS": " "})
    assert cfg.threads == 4

    with pytest.raises(ConfigError):
        apply_environment(cfg, {"ROUGH1D_THREADS": "many"})
    with pytest.raises(ConfigError):
        apply_environment(cfg, {"ROUGH1D_THREADS": "0"})
