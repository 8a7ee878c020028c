import json
import os
import subprocess
import sys

import pytest

from pqradial.regime import RegimeReport
from pqradial.serialize import dumps, fmt_float, loads, write_csv, write_json


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "pqradial.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_float_formatting():
    assert fmt_float(1.0 / 3.0) == format(1.0 / 3.0, ".17g")
    text = dumps({"a": 0.1, "b": [1, True, None]})
    assert text == '{"a": 0.10000000000000001, "b": [1, true, null]}'
    assert loads(text)["a"] == 0.1


def test_write_helpers(tmp_path):
    p = tmp_path / "x.json"
    write_json(str(p), {"v": 2.0 ** -30})
    assert loads(p.read_text())["v"] == 2.0 ** -30
    c = tmp_path / "x.csv"
    write_csv(str(c), ["a", "b"], [(1.0, "z")])
    assert c.read_text().splitlines() == ["a,b", "1,z"]


def test_classify_deterministic(tmp_path):
    args = ["classify", "-N", "3", "-p", "5", "-q", "1.6666666666666667",
            "-M", "1", "--out", str(tmp_path)]
    r1 = run_cli(*args)
    assert r1.returncode == 0
    first = (tmp_path / "classify.json").read_bytes()
    r2 = run_cli(*args)
    second = (tmp_path / "classify.json").read_bytes()
    assert first == second  # byte-identical artifacts
    payload = json.loads(first)
    assert payload["mass_position"] == "below_m_star"
    # round trip into the emitting type
    rep = RegimeReport.from_dict(payload)
    assert rep.params.p == 5.0 and rep.scale_invariant


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 3, "p": 2, "q": 4 / 3, "M": -1.0}))
    r = run_cli("classify", "--config", str(cfg), "-M", "1",
                "--out", str(tmp_path))
    assert r.returncode == 0
    payload = json.loads((tmp_path / "classify.json").read_text())
    assert payload["params"]["M"] == 1.0  # flag overrides config
    assert payload["params"]["p"] == 2.0


def test_usage_errors():
    r = run_cli("frobnicate")
    assert r.returncode == 2
    r2 = run_cli("classify", "-N", "3")  # missing p, q
    assert r2.returncode == 2
    assert "error" in r2.stderr


def test_regime_error_exit_code(tmp_path):
    r = run_cli("classify", "-N", "3", "-p", "0.5", "-q", "2", "-M", "1",
                "--out", str(tmp_path))
    assert r.returncode == 3
    assert json.loads(r.stderr.strip())["error"]["kind"] == "regime"


def test_equilibria_and_linearize(tmp_path):
    r = run_cli("equilibria", "-N", "3", "-p", "2", "-q", "1.3333333333333333",
                "-M", "0", "--out", str(tmp_path))
    assert r.returncode == 0
    payload = json.loads((tmp_path / "equilibria.json").read_text())
    assert payload["constant_solutions"]["roots"][0] == pytest.approx(2.0)
    r2 = run_cli("linearize", "-N", "3", "-p", "2", "-q", "1.3333333333333333",
                 "-M", "0", "--out", str(tmp_path))
    assert r2.returncode == 0
    reps = json.loads((tmp_path / "linearize.json").read_text())
    assert len(reps) == 2  # origin + the unique constant solution


def test_integrate_artifacts(tmp_path):
    r = run_cli("integrate", "-N", "3", "-p", "2", "-q", "1.3333333333333333",
                "-M", "1", "--chart", "planar_W4", "--initial", "0.01,0.008",
                "--t0", "0", "--t1", "2", "--out", str(tmp_path))
    assert r.returncode == 0
    for name in ("trajectory.csv", "trajectory.json", "trajectory.png"):
        assert (tmp_path / name).stat().st_size > 0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,x,y,r,u"
    traj = json.loads((tmp_path / "trajectory.json").read_text())
    assert traj["event"]["kind"] == "reached_t_end"


def test_portrait_artifacts(tmp_path):
    r = run_cli("portrait", "-N", "3", "-p", "2", "-q", "1.3333333333333333",
                "-M", "1", "--grid", "12", "--out", str(tmp_path))
    assert r.returncode == 0
    for name in ("field.csv", "portrait.json", "plot_portrait.py", "portrait.png"):
        assert (tmp_path / name).stat().st_size > 0
    side = json.loads((tmp_path / "portrait.json").read_text())
    assert side["case"] == "I"
    # the companion script renders from the delimited export alone
    r2 = subprocess.run([sys.executable, "plot_portrait.py", "field.csv",
                         "portrait.json", "replot.png"], cwd=tmp_path,
                        capture_output=True, text=True)
    assert r2.returncode == 0, r2.stderr
    assert (tmp_path / "replot.png").stat().st_size > 0


def test_shoot_artifacts(tmp_path):
    r = run_cli("shoot", "-N", "3", "-p", "2", "-q", "1.3333333333333333",
                "-M", "1", "--source", "origin", "--target", "0",
                "--out", str(tmp_path))
    assert r.returncode == 0
    payload = json.loads((tmp_path / "shoot.json").read_text())
    assert payload["success"] and payload["terminal_distance"] < 1e-6
    assert (tmp_path / "shoot.png").stat().st_size > 0


def test_barriers_command(tmp_path):
    r = run_cli("barriers", "-N", "3", "-p", "3", "-q", "1.8", "-M", "1",
                "--out", str(tmp_path))
    assert r.returncode == 0
    payload = json.loads((tmp_path / "barriers.json").read_text())
    assert payload["riccati_sub"]["certified"] is True
    assert "skipped" in payload["emden_super"]  # q > 2p/(p+1) here


def test_verify_subset(tmp_path):
    out = tmp_path / "report.json"
    r = run_cli("verify", "--suite", "04", "--out", str(out))
    assert r.returncode == 0
    assert "[PASS] criterion 04" in r.stdout
    report = json.loads(out.read_text())
    assert report[0]["passed"] is True
