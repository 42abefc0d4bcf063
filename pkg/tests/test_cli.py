import json
from fractions import Fraction

import numpy as np
import pytest

from rough1d.cli.main import RunConfig, _build_parser, main, resolve, run
from rough1d.engine.corrected_integral import corrected_approx
from rough1d.engine.functions import resolve_function
from rough1d.engine.levy_area import Curve, area_from_primitive
from rough1d.engine.paths import gen_fbm, sample_smooth
from rough1d.engine.types import Config
from rough1d.store import read_path_csv
from rough1d.store.paths import get_run_logs_dir


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "config"))
    monkeypatch.setenv("XDG_DATA_HOME", str(tmp_path / "data"))
    monkeypatch.delenv("ROUGH1D_THREADS", raising=False)


def run_json(capsys, argv):
    status = main([*argv, "--format", "json", "--no-log"])
    return status, json.loads(capsys.readouterr().out)


def data_lines(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


@pytest.mark.parametrize(
    ("m", "expected"),
    [
        (1, ["0: 1/2, 1: 1/2", "0: 0.5, 1: 0.5"]),
        (
            2,
            [
                "0: 1/6, 1/2: 2/3, 1: 1/6",
                "0: 0.16666666666666666, 0.5: 0.66666666666666663, 1: 0.16666666666666666",
            ],
        ),
    ],
)
def test_weights(capsys, m, expected):
    assert main(["weights", "--m", str(m), "--no-log"]) == 0
    assert capsys.readouterr().out.splitlines() == expected


def test_weights_artifact(tmp_path, capsys):
    out = tmp_path / "w.csv"
    assert main(["weights", "--m", "3", "--no-log", "-o", str(out)]) == 0
    lines = data_lines(out.read_text(encoding="utf-8"))
    assert lines[0] == "atom,weight,atom_decimal,weight_decimal"
    rows = [ln.split(",") for ln in lines[1:]]
    assert [r[:2] for r in rows] == [
        ["0", "7/90"],
        ["1/4", "16/45"],
        ["1/2", "2/15"],
        ["3/4", "16/45"],
        ["1", "7/90"],
    ]
    assert [r[2] for r in rows] == ["0", "0.25", "0.5", "0.75", "1"]
    for atom, weight, atom_dec, weight_dec in rows:
        assert float(weight_dec) == float(Fraction(weight))
        assert float(atom_dec) == float(Fraction(atom))


def test_area_check_zero_area_fails(capsys):
    argv = ["area-check", "--path-x", "sine", "--path-y", "sine-shifted", "--area", "zero"]
    status, body = run_json(capsys, [*argv, "--n-cells", "256"])
    assert status == 3
    assert body["passed"] is False
    assert body["max_chasles_defect"] > 1e-3
    assert body["provenance"] == "zero"


def test_area_check_pl_area_passes(capsys):
    argv = ["area-check", "--path-x", "sine", "--path-y", "sine-shifted", "--area", "pl"]
    status, body = run_json(capsys, [*argv, "--n-cells", "256", "--order", "2"])
    assert status == 0
    assert body["passed"] is True
    assert body["meta"]["command"] == "area-check"
    assert body["meta"]["config"]["parameters"]["order"] == 2


def test_integrate_reports_the_engine_value(capsys):
    argv = [
        "integrate", "--path-x", "sine", "--h", "square", "--area", "primitive",
        "--f", "sin", "--eps", "1/64", "--n-cells", "256",
    ]
    status, body = run_json(capsys, argv)
    assert status == 0

    x = sample_smooth("sine", 256)
    h = resolve_function("square")
    area = area_from_primitive(x, h, h.primitive)
    expected = corrected_approx(
        resolve_function("sin"), Curve.from_function(x, h), area, 1, Fraction(1, 64)
    ).value
    assert body["value"] == pytest.approx(expected, rel=1e-15, abs=1e-15)
    assert body["scheme"] == "corrected_averaged"
    assert body["epsilon"] == 1 / 64
    assert body["window"] == [0.0, 1.0]
    assert body["meta"]["config"]["settings"]["n_cells"] == 256


def test_integrate_rejects_a_misaligned_epsilon(capsys):
    argv = ["integrate", "--path-x", "sine", "--h", "sin", "--eps", "1/3", "--n-cells", "256"]
    assert main([*argv, "--no-log"]) == 2
    assert "epsilon" in capsys.readouterr().err


def test_bad_scheme_is_an_argparse_error():
    with pytest.raises(SystemExit) as info:
        main(["integrate", "--scheme", "simpson"])
    assert info.value.code == 2


def test_converge_table(capsys):
    argv = [
        "converge", "--fbm", "0.45,256,7", "--h", "sin", "--area", "pl",
        "--f", "cos", "--ladder", "1/4,1/8,1/16,1/32", "--no-log",
    ]
    assert main(argv) == 0
    out = capsys.readouterr().out
    lines = data_lines(out)
    assert lines[0] == "eps,value,residual"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["0.25", "0.125", "0.0625", "0.03125"]
    footer = dict(ln[2:].split("=", 1) for ln in out.splitlines() if ln.startswith("# "))
    for key in ("alpha", "exact", "extrapolated_limit", "rate_empirical", "rate_predicted"):
        assert key in footer
    # alpha defaults to the Hurst index minus 0.02.
    assert float(footer["alpha"]) == pytest.approx(0.43)
    assert footer["exact"] == "false"


def test_compare_is_deterministic(tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        argv = ["compare", "--fbm", "0.45,256,7", "--format", "json", "-o", str(path)]
        assert main([*argv, "--no-log"]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    body = json.loads(outputs[0])
    assert body["sup_diff"] < 0.2
    assert body["residual_solver"] < 1e-3


def test_gen_path_csv_on_stdout(capsys):
    assert main(["gen-path", "linear", "--n-cells", "4", "--no-log"]) == 0
    out = capsys.readouterr().out
    assert "# command=gen-path" in out
    assert data_lines(out) == ["t,value", "0,0", "0.25,0.25", "0.5,0.5", "0.75,0.75", "1,1"]


def test_gen_path_fbm_file_reads_back(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["gen-path", "--fbm", "0.6,64,3", "-o", str(out), "--no-log"]) == 0
    grid = read_path_csv(out)
    assert grid.n_cells == 64
    assert np.array_equal(grid.values, gen_fbm(0.6, 64, 3).values)


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "rough.toml"
    cfg.write_text("bogus = 1\n", encoding="utf-8")
    assert main(["weights", "--config", str(cfg), "--no-log"]) == 2
    assert "bogus" in capsys.readouterr().err


def test_missing_explicit_config(tmp_path):
    assert main(["weights", "--config", str(tmp_path / "absent.toml"), "--no-log"]) == 2


def test_settings_precedence(tmp_path):
    cfg = tmp_path / "rough.toml"
    cfg.write_text("threads = 2\nn_cells = 128\nm = 3\n", encoding="utf-8")
    parser = _build_parser()

    resolved = resolve(parser.parse_args(["weights", "--config", str(cfg)]), environ={})
    assert (resolved.settings.threads, resolved.settings.n_cells) == (2, 128)
    assert resolved.parameters["m"] == 3

    env = {"ROUGH1D_THREADS": "3"}
    resolved = resolve(parser.parse_args(["weights", "--config", str(cfg)]), environ=env)
    assert resolved.settings.threads == 3

    argv = ["weights", "--config", str(cfg), "--threads", "4", "--n-cells", "64", "--m", "2"]
    resolved = resolve(parser.parse_args(argv), environ=env)
    assert (resolved.settings.threads, resolved.settings.n_cells) == (4, 64)
    assert resolved.parameters["m"] == 2


def test_config_parameters_reach_the_command(tmp_path, capsys):
    cfg = tmp_path / "rough.toml"
    cfg.write_text("m = 2\n", encoding="utf-8")
    assert main(["weights", "--config", str(cfg), "--no-log"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "0: 1/6, 1/2: 2/3, 1: 1/6"


@pytest.mark.parametrize(
    ("command", "text", "key"),
    [
        ("weights", 'm = "two"\n', "m"),
        ("weights", "m = 2.5\n", "m"),
        ("solve", 'y0 = "abc"\n', "y0"),
        ("integrate", "window = [0.25]\n", "window"),
    ],
)
def test_mistyped_config_parameter(tmp_path, capsys, command, text, key):
    cfg = tmp_path / "rough.toml"
    cfg.write_text(text, encoding="utf-8")
    assert main([command, "--config", str(cfg), "--no-log"]) == 2
    assert key in capsys.readouterr().err


def test_mistyped_parameter_in_a_direct_run(capsys):
    config = RunConfig("weights", {"m": "two"}, settings=Config(log_runs=False))
    assert run(config) == 2
    assert "two" in capsys.readouterr().err


def test_config_ladder_may_be_a_list(tmp_path):
    cfg = tmp_path / "rough.toml"
    cfg.write_text("ladder = [0.25, 0.125]\nm = 2.0\n", encoding="utf-8")
    config = resolve(_build_parser().parse_args(["converge", "--config", str(cfg)]), environ={})
    assert config.parameters["ladder"] == "0.25,0.125"
    assert config.parameters["m"] == 2


def read_log():
    lines = []
    for path in sorted(get_run_logs_dir().glob("*.jsonl")):
        lines += [json.loads(ln) for ln in path.read_text(encoding="utf-8").splitlines()]
    return lines


def test_run_log_brackets_a_run(capsys):
    assert main(["weights", "--m", "1"]) == 0
    events = read_log()
    assert [e["event"] for e in events] == ["run_start", "run_end"]
    assert events[0]["command"] == "weights"
    assert events[0]["config"]["parameters"] == {"m": 1}
    assert events[1]["status"] == 0


def test_run_log_records_a_failed_audit(capsys):
    argv = ["area-check", "--path-x", "sine", "--path-y", "sine-shifted", "--area", "zero"]
    assert main([*argv, "--n-cells", "64"]) == 3
    kinds = [e["event"] for e in read_log()]
    assert kinds == ["run_start", "audit", "error", "run_end"]


def test_run_log_keeps_solver_events(capsys):
    assert main(["solve", "--driver", "sine", "--n-cells", "128"]) == 0
    kinds = [e["event"] for e in read_log()]
    assert kinds[0] == "run_start" and kinds[-1] == "run_end"
    assert "segment_accepted" in kinds


def test_no_log_flag(capsys):
    assert main(["weights", "--no-log"]) == 0
    assert read_log() == []
