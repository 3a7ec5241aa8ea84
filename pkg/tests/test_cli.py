import json

import pytest

from tightriesz.cli import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, EXIT_UNKNOWN, TOL_ENV, main
from tightriesz.instances import example_file


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv(TOL_ENV, raising=False)


def write(tmp_path, obj, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def test_paper_examples_ok(tmp_path):
    assert main(["paper-examples", "--out", str(tmp_path / "r")]) == EXIT_OK
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["tool"] == "tightriesz" and len(rep["problems"]) == 3
    assert "runtime" not in (tmp_path / "r.json").read_text()
    assert "runtime" in (tmp_path / "r.txt").read_text()


def test_loosen_flips_a_verdict(capsys):
    assert main(["paper-examples", "--loosen"]) == EXIT_MISMATCH
    assert "MISMATCH" in capsys.readouterr().out


def test_check_example_file(tmp_path):
    assert main(["check", write(tmp_path, example_file())]) == EXIT_OK


def test_check_mismatch(tmp_path):
    obj = example_file()
    obj["problems"][0]["expect"] = "infeasible"
    assert main(["check", write(tmp_path, obj)]) == EXIT_MISMATCH


def test_unknown_on_required_decision(tmp_path):
    # delta* = 0 on the numerical path sits in the unknown band of the strict problem
    obj = {"format": "tightriesz-instances", "version": 1,
           "systems": {"M2": {"kind": "full", "d": 2}},
           "problems": [{"name": "edge", "kind": "interpolation", "system": "M2",
                         "lower": [{"diag": [0, 0]}], "upper": [{"diag": [0, 0]}], "expect": "feasible"}]}
    assert main(["check", write(tmp_path, obj)]) == EXIT_UNKNOWN
    del obj["problems"][0]["expect"]
    assert main(["check", write(tmp_path, obj)]) == EXIT_OK


@pytest.mark.parametrize("argv", [
    ["nope"],
    ["campaign", "--family", "bogus"],
    ["campaign", "--family", "linf-in-linf", "--nk", "2"],
    ["campaign", "--family", "linf-in-linf", "--count", "-1"],
    ["--tol", "-1", "paper-examples"],
])
def test_bad_arguments(argv):
    assert main(argv) == EXIT_INPUT


def test_bad_files(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["check", write(tmp_path, "{\n,}")]) == EXIT_INPUT
    assert "line 2" in capsys.readouterr().err
    obj = example_file()
    obj["problems"][0]["colour"] = "red"
    assert main(["check", write(tmp_path, obj)]) == EXIT_INPUT
    assert "$.problems[0]" in capsys.readouterr().err


def test_tolerance_env(tmp_path, monkeypatch):
    monkeypatch.setenv(TOL_ENV, "1e-8")
    assert main(["paper-examples", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert json.loads((tmp_path / "a.json").read_text())["tolerance"] == 1e-8
    assert main(["--tol", "1e-7", "paper-examples", "--out", str(tmp_path / "b")]) == EXIT_OK
    assert json.loads((tmp_path / "b.json").read_text())["tolerance"] == 1e-7
    monkeypatch.setenv(TOL_ENV, "abc")
    assert main(["paper-examples"]) == EXIT_INPUT


def test_campaign_outputs_deterministic(tmp_path):
    args = ["campaign", "--family", "namioka-phelps", "--count", "4", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_campaign_zero_count(tmp_path):
    assert main(["campaign", "--family", "diagonal-in-full", "--count", "0", "--out", str(tmp_path / "z")]) == EXIT_OK
    rep = json.loads((tmp_path / "z.json").read_text())
    assert rep["counts"]["instances"] == 0


def test_check_outputs_deterministic(tmp_path):
    f = write(tmp_path, example_file())
    main(["check", f, "--out", str(tmp_path / "a")])
    main(["check", f, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
