import json
import os
import shutil

import pytest

from translin.cli import main
from translin.core import to_smtlib
from translin.frontend import parse_formula

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")


def _file(name):
    return os.path.join(CORPUS, name)


def test_unsat_exit_zero(capsys):
    assert main([_file("exp_nonpositive.smt2"), "--backend", "inprocess"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "unsat"


@pytest.mark.skipif(shutil.which("z3") is None, reason="no z3 binary on PATH")
def test_process_backend(capsys):
    assert main([_file("sin_ten.smt2"), "--backend", "z3 -in"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "unsat"


def test_sat_prints_model(capsys):
    assert main([_file("e_in_window.smt2"), "--backend", "inprocess"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "sat"
    assert any(line.strip().startswith("(define-fun y () Real") for line in out)
    assert any("; exp(1.0) in [" in line for line in out)


def test_budget_unknown_exit_two(capsys):
    code = main([_file("exp_equals_2_7.smt2"), "--backend", "inprocess", "--max-iters", "1"])
    assert code == 2
    assert capsys.readouterr().out.splitlines()[0] == "unknown"


def test_missing_backend_is_usage_error(capsys):
    assert main([_file("exp_nonpositive.smt2")]) == 1
    assert "required" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["/nonexistent.smt2", "--backend", "inprocess"]) == 1


def test_bad_flag():
    assert main(["x.smt2", "--bogus"]) == 1


def test_parse_error_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.smt2"
    bad.write_text("(assert (forall ((x Real)) (> x 0)))")
    assert main([str(bad), "--backend", "inprocess"]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_mock_backend(tmp_path, capsys):
    script = tmp_path / "s.json"
    script.write_text(json.dumps(["unsat"]))
    assert main([_file("exp_monotone.smt2"), "--mock", str(script)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "unsat"


def test_dump_lemmas_round_trip(tmp_path, capsys):
    dump = tmp_path / "lemmas.txt"
    code = main([_file("exp_equals_2_7.smt2"), "--backend", "inprocess", "--max-iters", "10",
                 "--dump-lemmas", str(dump), "--stats"])
    assert code == 2
    lines = dump.read_text().splitlines()
    assert lines
    for line in lines:
        f = parse_formula(line, {"x": "Real"})
        assert to_smtlib(f) == line
    err = capsys.readouterr().err.splitlines()
    stats = dict(line.split("=", 1) for line in err)
    assert stats["status"] == "unknown" and stats["reason"] == "budget"
    assert int(stats["lemmas"]) == len(lines)
