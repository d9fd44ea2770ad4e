import json

import pytest

from toeplitz_outliers import cli


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("TOL_OUT_DIR", str(tmp_path))
    return tmp_path


def test_detcheck_ok_and_failure(out, monkeypatch, capsys):
    assert cli.main(["detcheck", "--symbol", "limacon", "--n", "4", "5", "--trials", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["worst_rel_error"] < 1e-9
    monkeypatch.setattr(cli, "DETCHECK_TOL", 0.0)
    assert cli.main(["detcheck", "--symbol", "limacon", "--n", "4", "--trials", "1"]) == 4


def test_config_errors(out):
    assert cli.main(["simulate", "--gamma", "0.4"]) == 2
    assert cli.main(["simulate", "--bogus"]) == 2
    assert cli.main(["simulate", "--config", str(out / "missing.json")]) == 2
    assert cli.main(["field", "--symbol", "jordan"]) == 2


def test_numerical_failure_exit(out):
    # too few samples for a concentration estimate
    assert cli.main(["concentration", "--symbol", "jordan", "--wind", "1", "--trials", "5",
                     "--z", "0.1"]) == 3


def test_simulate_field_compare_plot(out, capsys):
    cfg = out / "cfg.json"
    cfg.write_text(json.dumps({"symbol": "jordan", "N": [60], "trials": 3, "seed": 4}))
    assert cli.main(["simulate", "--config", str(cfg)]) == 0
    assert (out / "eigen_N60.csv").exists() and (out / "summary_N60.json").exists()
    assert cli.main(["field", "--symbol", "jordan", "--wind", "1", "--trunc-l", "10",
                     "--trials", "3", "--window", "-0.5,0.5,-0.5,0.5"]) == 0
    zeros = out / "zeros_wind1_L10.json"
    assert cli.main(["compare", str(zeros), str(zeros), "--window", "-0.5,0.5,-0.5,0.5"]) == 0
    assert cli.main(["plot", str(out / "outliers_N60.json"), "--symbol", "jordan"]) == 0
    assert (out / "plot.svg").read_text().startswith("<svg")


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"symbol": "jordan", "N": [60], "trials": 3}))
    args = cli.build_parser().parse_args(["simulate", "--config", str(cfg), "--trials", "7"])
    c = cli.make_config(args)
    assert (c.symbol, c.N, c.trials) == ("jordan", [60], 7)


def test_specradius(out, capsys):
    assert cli.main(["specradius", "--n", "20", "--trials", "4"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["N"] == 20
