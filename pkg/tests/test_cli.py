import json
import subprocess
import sys

import numpy as np
import pytest

from robinflow.cli import fmt, main


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def data_rows(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_steklov_header(capsys):
    code, out, _ = run(capsys, "steklov")
    assert code == 0
    lines = out.splitlines()
    meta = json.loads(lines[0][2:])
    assert meta["command"] == "steklov" and meta["grid"] == 200
    assert lines[1] == "# sigma1=0.4621171573, sigma2=2.1639534137"
    assert lines[2] == "x,phi1,phi2"
    assert len(data_rows(out)) == 1 + 201
    first = [float(v) for v in lines[3].split(",")]
    assert first == pytest.approx([0.0, 1.0, -1.0])  # A_2 = 1/(1 - e) < 0


def test_attractor_json(capsys):
    code, out, _ = run(capsys, "attractor", "--lambda", "3", "--g", "arctan")
    assert code == 0
    doc = json.loads(out)
    assert doc["regime"] == "R5" and len(doc["nodes"]) == 5 and len(doc["edges"]) == 8


def test_attractor_verify_writes_file(capsys, tmp_path):
    path = tmp_path / "graph.json"
    code, out, _ = run(capsys, "attractor", "--lambda", "0", "--verify", "--out", str(path))
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert all(e["evidence"]["final_distance"] < 1e-2 for e in doc["edges"])


def test_simulate_blowup_event(capsys):
    code, out, _ = run(capsys, "simulate", "--lambda", "1", "--g", "arctan",
                       "--ic", "eigmode:1:0.01", "--t-end", "60")
    assert code == 0
    last = out.splitlines()[-1]
    assert last.startswith("# events: ")
    events = json.loads(last[len("# events: "):])
    assert any(e["type"] == "blowup_threshold" for e in events)
    header = data_rows(out)[0].split(",")
    assert header[:3] == ["t", "l2_norm", "energy"]


def test_simulate_json_and_file_ic(capsys, tmp_path):
    x = np.linspace(0, 1, 101)
    path = tmp_path / "ic.csv"
    np.savetxt(path, np.column_stack([x, 0.1 * np.cos(np.pi * x)]), delimiter=",")
    code, out, _ = run(capsys, "simulate", "--lambda", "-1", "--grid", "100", "--ic", f"file:{path}",
                       "--t-end", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["events"][-1]["type"] == "converged"
    assert doc["rows"][0][1] == pytest.approx(0.1 / np.sqrt(2), rel=1e-3)
    code, _, err = run(capsys, "simulate", "--lambda", "-1", "--ic", f"file:{path}")
    assert code == 1 and "do not match" in err


@pytest.mark.parametrize("argv", [
    ["steklov", "--grid", "16"],
    ["spectrum", "--gamma", "nan"],
    ["simulate", "--g", "arctan"],
    ["attractor", "--lambda", "1", "--g", "cubic"],
    ["frobnicate"],
    ["branch", "--dt", "-1"],
])
def test_parse_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "usage" in err


@pytest.mark.parametrize("argv,msg", [
    (["attractor", "--lambda", "0.46211715726000974"], "non-hyperbolic"),
    (["simulate", "--lambda", "1", "--ic", "eigmode:1:0.01", "--dt", "0.5"], "stability bound"),
    (["compactify", "--lambda", "1", "--at-infinity"], "nonzero"),
])
def test_computational_errors_exit_1(capsys, argv, msg):
    code, _, err = run(capsys, *argv)
    assert code == 1 and msg in err


def test_spectrum_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "spectrum", "--gamma", "0", "--n-eigs", "3")
    assert code == 0
    mus = [float(r.split(",")[1]) for r in data_rows(out)[1:]]
    assert mus == pytest.approx([-1.0, -1 - np.pi**2, -1 - 4 * np.pi**2], abs=1e-8)
    path = tmp_path / "eig.csv"
    code, _, _ = run(capsys, "spectrum", "--lambda", "3", "--emit-eigenfunctions", str(path))
    assert code == 0
    assert data_rows(path.read_text())[0].startswith("x,phi1,phi2")


def test_branch_and_compactify(capsys):
    code, out, _ = run(capsys, "branch", "--branch", "2", "--steps", "20")
    assert code == 0 and data_rows(out)[0] == "lambda,branch,amplitude,stability,morse_index"
    amps = [float(r.split(",")[2]) for r in data_rows(out)[1:]]
    assert len(amps) == 40 and sum(a > 0 for a in amps) == 20  # both signs of c
    code, out, _ = run(capsys, "compactify", "--lambda", "3", "--ic", "eigmode:2:1", "--at-infinity",
                       "--t-end", "1")
    assert code == 0 and out.splitlines()[-1].startswith("# max_drift=")


def test_byte_identical_reruns(capsys):
    argv = ["simulate", "--lambda", "0", "--ic", "eigmode:1:0.1", "--t-end", "2", "--seed", "4"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "selftest", "--format", "json")
    assert all(c["passed"] for c in json.loads(out)["checks"])


def test_fmt_ten_significant_digits():
    assert fmt(1 / 3) == "0.3333333333"
    assert fmt(2) == "2"
    assert fmt(-1e-20) == "-1e-20"


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "robinflow.cli", "steklov", "--grid", "32"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1].startswith("# sigma1=0.4621171573")
