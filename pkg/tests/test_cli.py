import json
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from rnnreal.algebra import parse_poly
from rnnreal.cli import main
from rnnreal.embedding import build_r_aux, build_r_sigma
from rnnreal.specfile import load_document, rational_from_obj, rnn_from_obj, rnn_to_dict

from support import worked_example

SPECS = Path(__file__).resolve().parent.parent / "specs"
WORKED = SPECS / "two_neuron_sigmoid.json"
TANH3 = SPECS / "tanh_three_neuron.json"


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def write_spec(tmp_path, obj, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj, indent=2))
    return path


def worked_obj(**changes):
    obj = json.loads(WORKED.read_text())
    obj.update(changes)
    return obj


def test_build_worked_example(tmp_path, capsys):
    code, out, _ = run(["build", WORKED, "--out", tmp_path], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc == json.loads((tmp_path / "report.json").read_text())
    aux = json.loads((tmp_path / "r_aux.json").read_text())
    assert aux["dim"] == 2
    x1, x2 = parse_poly("X1", 2), parse_poly("X2", 2)
    one = parse_poly("1", 2)
    f = aux["fields"][0]
    assert parse_poly(f[0]["numerator"], 2) == x1 * x2 * (one - x1)
    assert parse_poly(f[1]["numerator"], 2) == x1 * x2 * (one - x2)
    assert [float(Fraction(v)) for v in aux["v0"]] == pytest.approx([1 / (1 + 2.718281828459045 ** (-1 / 3))] * 2, abs=1e-12)


def test_build_dimensions_tanh(tmp_path, capsys):
    code, _, _ = run(["build", TANH3, "--out", tmp_path], capsys)
    assert code == 0
    dims = json.loads((tmp_path / "dimensions.json").read_text())
    assert (dims["dim_r_sigma"], dims["dim_r_aux"]) == (9, 6)


def test_emitted_systems_reparse_identically(tmp_path, capsys):
    run(["build", TANH3, "--out", tmp_path], capsys)
    sys_, _ = load_document(TANH3)[1:3]
    for name, built in (("r_sigma.json", build_r_sigma(sys_)), ("r_aux.json", build_r_aux(sys_))):
        back = rational_from_obj(json.loads((tmp_path / name).read_text()))
        assert back.dim == built.dim and back.v0 == built.v0
        for fa, fb in zip(back.fields, built.fields):
            assert all(a.numerator == b.numerator and a.denominator == b.denominator for a, b in zip(fa, fb))
        assert all(a.numerator == b.numerator for a, b in zip(back.outputs, built.outputs))


def test_rnn_spec_roundtrip():
    sys_ = worked_example()
    back, u = rnn_from_obj(json.loads(json.dumps(rnn_to_dict(sys_))))
    assert u is None
    assert (back.A, back.B, back.C, back.x0, back.alphabet) == (sys_.A, sys_.B, sys_.C, sys_.x0, sys_.alphabet)
    assert back.activation == sys_.activation


def test_malformed_row_length(tmp_path, capsys):
    path = write_spec(tmp_path, worked_obj(A=[["0", "1"], ["1"]]))
    code, _, err = run(["build", path, "--out", tmp_path / "o"], capsys)
    assert code == 2
    assert "'A'" in err and "line" in err


def test_empty_alphabet(tmp_path, capsys):
    path = write_spec(tmp_path, worked_obj(alphabet=[]))
    code, _, err = run(["build", path, "--out", tmp_path / "o"], capsys)
    assert code == 2 and "alphabet" in err


def test_json_syntax_error_has_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "A": [[0, 1],\n  oops\n}\n')
    code, _, err = run(["build", path, "--out", tmp_path / "o"], capsys)
    assert code == 2 and "line 3" in err


def test_verify_commands_on_worked_example(tmp_path, capsys):
    code, out, _ = run(["verify-embedding", WORKED, "--out", tmp_path / "a"], capsys)
    assert code == 0
    (entry,) = json.loads(out)["entries"]
    assert entry["status"] == "holds" and entry["evidence"]["state_deviation"] <= 1e-6
    code, out, _ = run(["verify-aux", WORKED, "--out", tmp_path / "b"], capsys)
    assert code == 0
    (entry,) = json.loads(out)["entries"]
    assert entry["evidence"]["closed_form_deviation"] <= 1e-6
    assert entry["evidence"]["finite_difference_deviation"] <= 1e-4


def test_verify_needs_input_section(tmp_path, capsys):
    obj = worked_obj()
    del obj["input"]
    code, _, err = run(["verify-embedding", write_spec(tmp_path, obj), "--out", tmp_path / "o"], capsys)
    assert code == 2 and "input" in err


def test_observability_certificate_text(tmp_path, capsys):
    code, out, _ = run(["check-observability", WORKED, "--out", tmp_path], capsys)
    assert code == 0
    doc = json.loads(out)
    assert "Σ weakly observable" in out
    statuses = {e["name"]: e["status"] for e in doc["entries"]}
    assert statuses["weak_observability"] == "holds"


def test_nontrivial_coordinate_subspace_exits_4(tmp_path, capsys):
    path = write_spec(tmp_path, worked_obj(A=[["1", "0"], ["0", "2"]]))
    code, out, _ = run(["check-observability", path, "--out", tmp_path / "o"], capsys)
    assert code == 4
    entries = {e["name"]: e for e in json.loads(out)["entries"]}
    assert entries["coordinate_subspace_trivial"]["status"] == "fails"


def test_reports_are_byte_identical(tmp_path, capsys):
    run(["report", WORKED, "--out", tmp_path / "a"], capsys)
    run(["report", WORKED, "--out", tmp_path / "b"], capsys)
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_report_every_entry_justified(tmp_path, capsys):
    code, out, _ = run(["report", TANH3, "--out", tmp_path], capsys)
    assert code in (0, 4)
    for e in json.loads(out)["entries"]:
        assert e["status"] in ("holds", "fails", "inconclusive")
        assert e["evidence"] if e["status"] != "inconclusive" else e["reason"]


def test_simulate_writes_csvs(tmp_path, capsys):
    code, out, _ = run(["simulate", WORKED, "--horizon", "1", "--out", tmp_path], capsys)
    assert code == 0
    doc = json.loads(out)
    files = [t["file"] for t in doc["trajectories"]]
    assert files == ["trajectory_rnn.csv", "trajectory_r_sigma.csv", "trajectory_r_aux.csv"]
    for t in doc["trajectories"]:
        lines = (tmp_path / t["file"]).read_text().splitlines()
        assert len(lines) == t["rows"] + 1
        assert lines[0].startswith("t,")


def test_simulation_error_exits_3(tmp_path, capsys):
    obj = {
        "schema": "rnnreal.rational/1",
        "dim": 1,
        "fields": [[{"numerator": "1", "denominator": "1 - X1"}]],
        "outputs": ["X1"],
        "v0": ["0"],
        "input": {"durations": ["2"], "letters": [0]},
    }
    code, _, err = run(["simulate", write_spec(tmp_path, obj), "--out", tmp_path / "o"], capsys)
    assert code == 3 and err


def test_rational_spec_checks(tmp_path, capsys):
    obj = {
        "schema": "rnnreal.rational/1",
        "dim": 2,
        "fields": [["1", "0"], ["0", "X1"]],
        "outputs": ["X1"],
        "v0": ["0", "0"],
    }
    path = write_spec(tmp_path, obj)
    code, out, _ = run(["check-reachability", path, "--out", tmp_path / "r"], capsys)
    assert code == 0
    (entry,) = json.loads(out)["entries"]
    assert entry["status"] == "holds" and entry["evidence"]["rank_at_v0"] == 2


def test_bad_arguments_exit_2(tmp_path, capsys):
    code, _, _ = run(["simulate", WORKED, "--step", "-1", "--out", tmp_path], capsys)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", str(WORKED)])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    env = dict(os.environ, RNNREAL_LOG_LEVEL="ERROR")
    proc = subprocess.run([sys.executable, "-m", "rnnreal", "build", str(WORKED), "--out", str(tmp_path)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "build"
