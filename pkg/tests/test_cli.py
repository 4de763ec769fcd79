from __future__ import annotations

import json
import subprocess
import sys

import pytest

from gf2synth.cli import main
from gf2synth.cnot_circuit import CnotCircuit
from gf2synth.gf2_core import BitMatrix, random_invertible


@pytest.fixture
def run(capsys, cache_dir):
    def _run(*argv, cache=True):
        args = list(argv)
        if cache and cache_dir is not None:
            args += ["--cache-dir", str(cache_dir)]
        code = main(args)
        out = capsys.readouterr().out
        return code, out

    return _run


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_synth_identity_on_line(tmp_path, run):
    mat = _write(tmp_path, "id.txt", BitMatrix.identity(4).to_text())
    out_path = tmp_path / "c.txt"
    code, out = run("synth", "-a", "line:4", "-i", mat, "-o", str(out_path))
    assert code == 0
    report = json.loads(out)
    assert report["verdicts"]["ok"] and report["depth"] <= 20
    assert report["n"] == 4 and report["p"] == 1
    assert CnotCircuit.from_text(out_path.read_text()).n_qubits == 4


def test_synth_then_verify_on_ladder(tmp_path, run):
    a = random_invertible(16, 5)
    mat = _write(tmp_path, "a.txt", a.to_text())
    circ = tmp_path / "c.txt"
    code, out = run("synth", "-a", "ladder:2x8", "-i", mat, "-o", str(circ))
    report = json.loads(out)
    assert code == 0 and report["bound"] == 67 and report["depth"] <= 67
    code, out = run("verify", "-a", "ladder:2x8", "-i", mat, "-c", str(circ))
    assert code == 0 and json.loads(out)["verdicts"]["ok"]

    # drop one gate: the operator changes
    c = CnotCircuit.from_text(circ.read_text())
    broken = _write(tmp_path, "broken.txt", CnotCircuit(16, c.gates[1:]).to_text())
    code, out = run("verify", "-a", "ladder:2x8", "-i", mat, "-c", broken)
    assert code == 4 and not json.loads(out)["verdicts"]["functional"]


def test_verify_detects_off_graph_gate(tmp_path, run):
    mat = _write(tmp_path, "id.txt", BitMatrix.identity(4).to_text())
    circ = _write(tmp_path, "c.txt", "qubits 4\nCNOT 0 3\nCNOT 0 3\n")
    code, out = run("verify", "-a", "line:4", "-i", mat, "-c", circ)
    report = json.loads(out)
    assert code == 4
    assert report["verdicts"]["functional"] and not report["verdicts"]["compliance"]


def test_verify_explicit_bound(tmp_path, run):
    mat = _write(tmp_path, "id.txt", BitMatrix.identity(2).to_text())
    circ = _write(tmp_path, "c.txt", "qubits 2\nCNOT 0 1\nCNOT 0 1\n")
    code, out = run("verify", "-a", "line:2", "-i", mat, "-c", circ, "--bound", "1")
    assert code == 4 and not json.loads(out)["verdicts"]["depth_bound"]


def test_input_errors(tmp_path, run):
    mat = _write(tmp_path, "id.txt", BitMatrix.identity(5).to_text())
    assert run("synth", "-a", "line:4", "-i", mat)[0] == 2
    assert run("synth", "-a", "torus:4", "-i", mat)[0] == 2
    bad = _write(tmp_path, "bad.txt", "10\n2\n")
    assert run("synth", "-a", "line:2", "-i", bad)[0] == 2
    assert run("synth", "-a", "line:5", "-i", str(tmp_path / "missing.txt"))[0] == 2


def test_singular_matrix_exit_code(tmp_path, run):
    mat = _write(tmp_path, "s.txt", "11\n11\n")
    assert run("synth", "-a", "line:2", "-i", mat)[0] == 3


def test_enumerate_ladder(run):
    code, out = run("enumerate", "-P", "1", "-a", "ladder2")
    data = json.loads(out)
    assert code == 0 and data["counts_by_depth"] == [1, 3, 14, 15, 2] and data["total"] == 35
    code, out = run("enumerate", "-P", "2", "-a", "ladder:2x5")
    assert json.loads(out)["counts_by_depth"] == [0, 0, 1, 7, 8]


def test_enumerate_full3(run):
    code, out = run("enumerate", "-P", "1", "-a", "full3")
    data = json.loads(out)
    assert data["counts_by_depth"] == [1, 33, 649, 712] and data["total"] == 1395


def test_enumerate_writes_table(tmp_path, run):
    from gf2synth.box_solvers import load_table

    out_path = tmp_path / "t.dt"
    code, _ = run("enumerate", "-P", "3", "-a", "ladder3", "-o", str(out_path))
    assert code == 0 and load_table(out_path).total == 168


def test_enumerate_budget(tmp_path, run):
    code, out = run("enumerate", "-P", "1", "-a", "ladder4", "--budget", "50", "--cache-dir", str(tmp_path), cache=False)
    data = json.loads(out)
    assert code == 5 and data["status"] == "budget exceeded" and data["counts_by_depth"][0] == 1


def test_bench_line_and_csv(run):
    code, out = run("bench", "-a", "line", "-n", "8,16", "-t", "5", "-s", "1")
    rows = json.loads(out)
    assert code == 0 and [r["n"] for r in rows] == [8, 16]
    assert all(r["max_depth"] <= 5 * r["n"] for r in rows)
    code, out = run("bench", "-a", "blocks-full:p=4", "-n", "16", "-t", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("architecture,") and len(lines) == 2


def test_bench_is_deterministic(run):
    first = json.loads(run("bench", "-a", "ladder:2", "-n", "8", "-t", "4", "-s", "3")[1])
    second = json.loads(run("bench", "-a", "ladder:2", "-n", "8", "-t", "4", "-s", "3")[1])
    for a, b in zip(first, second):
        a.pop("elapsed_s"), b.pop("elapsed_s")
        assert a == b


def test_bench_bad_family(run):
    assert run("bench", "-a", "blocks-full", "-n", "8")[0] == 2
    assert run("bench", "-a", "ladder:3", "-n", "8")[0] == 2


def test_combined_synth(tmp_path, run):
    mat = _write(tmp_path, "a.txt", random_invertible(16, 2).to_text())
    code, out = run("synth", "-a", "grid:2x8", "--combined", "-i", mat)
    report = json.loads(out)
    assert code == 0 and report["depth"] <= report["bound"]


def test_module_entry_point(tmp_path):
    mat = _write(tmp_path, "id.txt", BitMatrix.identity(3).to_text())
    proc = subprocess.run(
        [sys.executable, "-m", "gf2synth", "synth", "-a", "line:3", "-i", mat], capture_output=True, text=True
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdicts"]["ok"]
