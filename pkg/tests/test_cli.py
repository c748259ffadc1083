import csv
import io
import json

import pytest

from dualcusum.cli import PRESETS, ExperimentConfig, main


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_trace_intro(capsys):
    assert main(["trace", "--seed", "1"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 150
    for r in rows:
        assert (r["signal"] == "1") == (float(r["rL"]) >= 8.0)
        assert (r["signal"] == "0") == (float(r["rU"]) <= 8.0)
    # a non-restarting chart keeps signalling while it stays above the threshold
    sig = "".join(r["signal"] for r in rows)
    assert "111" in sig


def test_trace_single_threshold_definitive_after_coupling(capsys):
    assert main(["trace", "--preset", "upper-boundary", "--h", "10", "--seed", "4"]) == 0
    rows = _rows(capsys.readouterr().out)
    coupled = [r for r in rows if r["coupled"] == "1"]
    assert coupled
    assert all(r["signal"] != "-" for r in coupled)


def test_trace_needs_single_h(capsys):
    assert main(["trace", "--preset", "upper-boundary"]) == 2


def test_trace_horizon_zero(tmp_path, capsys):
    cfg = PRESETS["intro"].to_dict()
    cfg["schedule"] = {"horizon": 0, "periods": []}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "trace.csv"
    assert main(["trace", "--config", str(path), "--out", str(out)]) == 0
    assert out.read_text() == "t,x,rL,rU,signal,coupled\n"


def test_simulate_quick_schema(capsys):
    assert main(["simulate", "--reps", "10", "--seed", "3"]) == 0
    captured = capsys.readouterr()
    rows = _rows(captured.out)
    assert list(rows[0]) == ["t", "h", "false_rate", "correct_rate", "none_rate"]
    assert len(rows) == 3 * 75
    assert captured.err.count("false_mass=") == 3


def test_simulate_rejects_small_h(capsys):
    assert main(["simulate", "--h", "4", "6", "--reps", "10"]) == 2
    assert "thresholds.h[0]" in capsys.readouterr().err


def test_simulate_threads_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--reps", "200", "--seed", "7", "--out", str(a)]) == 0
    assert main(["simulate", "--reps", "200", "--seed", "7", "--threads", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_roundtrip(tmp_path):
    cfg = PRESETS["upper-boundary"]
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_bad_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"model": {"type": "gaussian",}\n}')
    assert main(["simulate", "--config", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d["thresholds"].pop("kL"), "kL"),
        (lambda d: d["thresholds"].update(h=[6, 3]), "thresholds.h[1]"),
        (lambda d: d.pop("schedule"), "schedule"),
        (lambda d: d["model"].update(sigma=-1), "sigma"),
    ],
)
def test_bad_fields(tmp_path, capsys, mutate, field):
    doc = PRESETS["upper-boundary"].to_dict()
    mutate(doc)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    assert main(["simulate", "--config", str(path), "--reps", "5"]) == 2
    assert field in capsys.readouterr().err


def test_arl(capsys):
    assert main(["arl", "--side", "lower", "--regime", "f0", "--k", "5", "--method", "markov", "--states", "100"]) == 0
    out = capsys.readouterr().out
    arl = float(out.split("arl=")[1].split()[0])
    assert 900 <= arl <= 960


def test_arl_monte_carlo(capsys):
    assert main(["arl", "--regime", "f1", "--k", "3", "--method", "monte-carlo", "--reps", "500", "--seed", "2"]) == 0
    assert "std_error=" in capsys.readouterr().out


def test_calibrate(capsys):
    assert main(["calibrate", "--target-arl", "930", "--method", "markov", "--states", "100"]) == 0
    k = float(capsys.readouterr().out.split(" k=")[1].split()[0])
    assert abs(k - 5.0) <= 0.1


def test_calibrate_errors(capsys):
    assert main(["calibrate", "--target-arl", "1"]) == 2
    assert main(["calibrate", "--target-arl", "2", "--regime", "f0"]) == 3


def test_couple(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["couple", "--h", "10", "--regime", "f1", "--reps", "200", "--seed", "1", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert len(rows) == 200
    assert all(int(r["T"]) <= int(r["nu_up"]) for r in rows)
    assert "mean_T=" in capsys.readouterr().out


def test_couple_censoring_exit(capsys):
    assert main(["couple", "--reps", "50", "--t-max", "2"]) == 3


def test_bad_regime(capsys):
    assert main(["arl", "--k", "5", "--regime", "f7"]) == 2


def test_verify_quick(capsys):
    assert main(["verify", "--quick"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("[PASS]") for line in lines)
