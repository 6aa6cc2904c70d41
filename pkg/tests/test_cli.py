import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from noetherian.cli import main, parse_box, parse_complex, parse_heights, parse_path

PROGRAMS = Path(__file__).resolve().parents[1] / "demos" / "programs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parsers():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("-0.5") == -0.5
    assert parse_path("0,0; 1,0.5") == [[0, 0], [1, 0.5]]
    assert parse_heights("1..4") == [1, 2, 3, 4]
    assert parse_heights("2,8") == [2, 8]
    assert [tuple(map(str, b)) for b in parse_box("-1:1,0:1/2")] == [("-1", "1"), ("0", "1/2")]


def test_compile_j(capsys):
    code, out, _ = run(capsys, "compile", PROGRAMS / "j.ntr")
    assert code == 0
    rep = json.loads(out)
    assert rep["declarations"]["j"]["params"] == {"alpha": 6, "beta": 1, "ell": 5, "n": 1}
    assert rep["config"]["constants"]["c_cal"] == 8.0


def test_zeros_of_sine(capsys):
    code, out, _ = run(capsys, "zeros", PROGRAMS / "sin.ntr", "--disc", "0", "10")
    assert code == 0 and json.loads(out)["count"] == 7


def test_sin_graph_census_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "census", PROGRAMS / "sin_graph.ntr", "--heights", "1..64")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "H,count,leaf_id,certificate_kind"
    assert len(lines) == 65
    assert all(line.split(",")[1] == "1" for line in lines[1:])


def test_eval_and_bernstein(capsys):
    code, out, _ = run(capsys, "eval", PROGRAMS / "sin.ntr", "0; 1")
    rep = json.loads(out)
    assert code == 0
    assert abs(complex(*rep["value"]) - 0.8414709848078965) < 1e-12
    code, out, _ = run(capsys, "bernstein", "let f = exp(z) on domain(z: 0, 2)", "--disc", "0", "1")
    rep = json.loads(out)
    assert code == 0 and abs(rep["index"]["index"] - 0.5) < 1e-9 and rep["zeros_in_inner_disc"] == 0


def test_polydisc(capsys):
    code, out, _ = run(capsys, "polydisc", PROGRAMS / "circle.ntr", "--ball", "1,0", "0.5")
    rep = json.loads(out)
    assert code == 0 and rep["verified"] and rep["polydisc"]["degree"] == 2


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check")
    rep = json.loads(out)
    assert code == 0 and rep["failed"] == 0


def test_refusals_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "compile", tmp_path / "missing.ntr")
    assert code == 2 and "error" in json.loads(err)
    code, _, err = run(capsys, "compile", "let f = exp( on domain(x: 0, 1)")
    assert code == 2 and json.loads(err)["error"] == "syntax"
    code, _, _ = run(capsys, "zeros", PROGRAMS / "sin.ntr", "--disc", "0", "3.14159265358979")
    assert code == 2
    code, _, _ = run(capsys, "--precision", "20", "check")
    assert code == 2
    code, _, _ = run(capsys, "--config", tmp_path / "nope.cfg", "check")
    assert code == 2


def test_config_file_and_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# calibrations\nc_cal = 11\nseed = 5\n")
    code, out, _ = run(capsys, "--config", cfg, "compile", PROGRAMS / "sin.ntr")
    rep = json.loads(out)
    assert rep["config"]["constants"]["c_cal"] == 11 and rep["config"]["seed"] == 5
    monkeypatch.setenv("NOETHER_CONFIG", str(cfg))
    code, out, _ = run(capsys, "--seed", "9", "compile", PROGRAMS / "sin.ntr")
    rep = json.loads(out)
    assert rep["config"]["constants"]["c_cal"] == 11 and rep["config"]["seed"] == 9


def test_out_file_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for dest in (a, b):
        assert run(capsys, "--out", dest, "census", PROGRAMS / "circle.ntr", "--heights", "1..5")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["command"] == "census"


def test_console_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "noetherian.cli", "compile", str(PROGRAMS / "sin.ntr")],
                          capture_output=True, text=True, env=env, timeout=120)
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "compile"
