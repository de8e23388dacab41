import json

import pytest

from modframe.cli import main
from modframe.io import dumps

from test_io import MINIMAL


@pytest.fixture
def bundle(tmp_path):
    path = tmp_path / "b.json"
    assert main(["rand", "--group", "S3", "--points", "2", "--seed", "3", "--out", str(path)]) == 0
    return path


def run(args, tmp_path, name="r.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


@pytest.mark.parametrize("cmd", [
    ["validate"], ["frame", "analyze"], ["frame", "parseval"],
    ["group", "classify-vector", "--vector", "eta"], ["group", "dilate"],
    ["commutant", "compute"], ["commutant", "compute", "--of", "G''"],
    ["commutant", "lemma33"], ["commutant", "trace-check", "--pairs", "10"],
    ["param", "solve"], ["param", "solve", "--kind", "invertible"],
    ["param", "apply", "--kind", "adjointable"], ["param", "path", "--steps", "4"],
    ["approx", "best"], ["approx", "certify", "--samples", "10"]])
def test_commands_pass(cmd, bundle, tmp_path):
    code, report = run(cmd + [str(bundle)], tmp_path)
    assert code == 0 and report["passed"], report


def test_approx_best_scalar(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(MINIMAL))
    code, report = run(["approx", "best", str(path)], tmp_path)
    assert code == 0
    assert report["results"]["best"]["generators"][0]["fibers"] == [[[1.0, 0.0]]]


def test_lemma33_without_bundle(tmp_path):
    code, report = run(["commutant", "lemma33", "--group", "Z3"], tmp_path)
    assert code == 0 and report["verdicts"]["lemma33"]


def test_math_failure_exit_1(bundle, tmp_path):
    code, report = run(["param", "solve", str(bundle), "--xi", "x"], tmp_path)
    assert code == 1 and not report["passed"] and "error" in report["results"]


def test_input_errors_exit_2(bundle, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{corrupt")
    assert main(["validate", str(bad)]) == 2
    assert main(["frame", "analyze", str(bundle), "--frame", "nope"]) == 2
    assert main(["commutant", "lemma33"]) == 2
    assert "input error" in capsys.readouterr().err


def test_env_tolerance(bundle, monkeypatch):
    monkeypatch.setenv("MODFRAME_TOL", "oops")
    assert main(["validate", str(bundle)]) == 2


def test_text_format(bundle, capsys):
    assert main(["group", "dilate", str(bundle), "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "passed: True" in out and "[ok] isometry" in out


def test_byte_identical_reports(bundle, tmp_path):
    args = ["approx", "certify", str(bundle), "--samples", "10", "--seed", "5"]
    run(args, tmp_path, "a.json")
    run(args, tmp_path, "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_rand_to_stdout(capsys):
    assert main(["rand", "--seed", "2"]) == 0
    first = capsys.readouterr().out
    assert main(["rand", "--seed", "2"]) == 0
    assert capsys.readouterr().out == first
    assert dumps(json.loads(first)) == first.strip()
