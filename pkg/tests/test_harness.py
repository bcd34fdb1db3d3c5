from __future__ import annotations

import dataclasses
import json

import pytest

from seanodes import cli, corpus
from seanodes.equivalence import structurally_equivalent
from seanodes.harness import (
    DIVISION_BY_ZERO, FIXED, UNARY, boundary_inputs, boundary_values, gen_op_tests,
    method_name, oracle_eval, parameter_widths, run_commutation_test, run_difftest,
)
from seanodes.ir_model import Golden, Program, TestCase
from seanodes.textformat import load_program
from seanodes.values import mk_int

MIN32, MAX32 = -2**31, 2**31 - 1


def test_boundary_values():
    assert boundary_values(32) == [MIN32, MIN32 + 1, -2, -1, 0, 1, 2, MAX32 - 1, MAX32]
    assert len(boundary_values(64)) == 9
    assert boundary_values(1) == [-1, 0]
    assert len(boundary_values(8)) == 9


@pytest.mark.parametrize("op,bits,args,want", [
    ("SignedDiv", 32, (MIN32, -1), MIN32),
    ("SignedDiv", 32, (-7, 2), -3),
    ("SignedRem", 32, (-7, 2), -1),
    ("SignedRem", 32, (1, 0), DIVISION_BY_ZERO),
    ("LeftShift", 32, (1, 33), 2),
    ("RightShift", 32, (-8, 1), -4),
    ("UnsignedRightShift", 32, (-1, 28), 15),
    ("UnsignedRightShift", 64, (-1, 0), -1),
    ("Abs", 32, (MIN32,), MIN32),
    ("Not", 64, (0,), -1),
    ("Add", 32, (MAX32, 1), MIN32),
    ("IntegerLessThan", 32, (-1, 1), 1),
])
def test_oracle_examples(op, bits, args, want):
    assert oracle_eval(op, bits, args) == want


def test_oracle_rejects_unknown():
    with pytest.raises(ValueError):
        oracle_eval("FloatDiv", 32, (1, 2))


@pytest.mark.parametrize("op", ["Add", "SignedDiv", "Negate"])
def test_gen_counts(op):
    p = gen_op_tests(op, 32)
    want = 72 if op in FIXED else 9 if op in UNARY else 81
    assert len(p.tests) == want
    assert all(t.method == method_name(op, 32) for t in p.tests)


def test_gen_left_shift_matches_corpus(programs):
    p = gen_op_tests("LeftShift", 32)
    shipped = programs["leftShiftNode32"]
    assert list(p.methods) == ["leftShiftNode32"]
    assert structurally_equivalent(p.methods["leftShiftNode32"], shipped.methods["leftShiftNode32"])
    assert TestCase("leftShiftNode32", (mk_int(32, 2), mk_int(32, 2)), mk_int(32, 8)) in p.tests


def test_gen_rejects_bad_args():
    with pytest.raises(ValueError):
        gen_op_tests("FloatDiv", 32)
    with pytest.raises(ValueError):
        gen_op_tests("Add", 16)


def test_difftest_flags_wrong_expectation():
    p = gen_op_tests("Add", 32)
    bad = dataclasses.replace(p.tests[0], expect=mk_int(32, 12345))
    report = run_difftest(Program(p.methods, {}, [bad] + p.tests[1:]))
    assert report.failed == 1 and report.passed == 80
    assert report.failures()[0].expected == "i32:12345"
    assert "FAIL" in report.to_text()


def test_difftest_width_note():
    p = gen_op_tests("Add", 32)
    bad = dataclasses.replace(p.tests[0], expect=mk_int(64, 0))
    row = run_difftest(Program(p.methods, {}, [bad])).rows[0]
    assert row.verdict == "fail" and "bit width 32" in row.detail


def test_difftest_empty():
    report = run_difftest(Program(gen_op_tests("Add", 32).methods))
    assert report.total == 0 and report.ok


def test_difftest_deterministic_under_jobs_and_seed():
    p = gen_op_tests("Mul", 64)
    base = run_difftest(p)
    assert run_difftest(p, jobs=4, seed=3).rows == base.rows
    data = json.loads(base.to_json())
    assert data["summary"]["passed"] == 81


def test_parameter_widths_and_inputs(programs):
    g = programs["helper_call"].methods["byteIdentity"]
    assert parameter_widths(g) == [8]
    assert len(boundary_inputs(g)) == 9
    assert len(boundary_inputs(programs["test1"].methods["test1"])) == 81


def test_commutation_passes_on_corpus(programs):
    for name, p in programs.items():
        r = run_commutation_test(p, ["CondElim", "Canonicalize"])
        assert r.ok, (name, r.to_text())


def test_commutation_golden_rows(programs):
    r = run_commutation_test(programs["test1"], ["CondElim"])
    golden = [row for row in r.rows if row.source == "golden"]
    assert len(golden) == 1 and golden[0].verdict == "pass"


def test_commutation_broken_golden(programs):
    p = programs["test1"]
    broken = Program(p.methods, p.fields, p.tests,
                     [Golden("test1", ("CondElim",), p.methods["test1"])])
    r = run_commutation_test(broken, ["CondElim"])
    fails = r.failures()
    assert len(fails) == 1 and fails[0].source == "golden"
    assert "If" in fails[0].detail


def test_commutation_catches_wrong_optimization(programs, monkeypatch):
    import seanodes.optimizer as opt
    p = programs["test1"]

    def swap_branches(g):
        n, s = g.nodes[7]
        return g.with_nodes({7: (n.replace(trueSucc=n["falseSucc"], falseSucc=n["trueSucc"]), s)})

    monkeypatch.setitem(opt.PHASES, "Canonicalize", swap_branches)
    r = run_commutation_test(Program(p.methods, p.fields, p.tests), ["Canonicalize"])
    assert r.failed > 0


# -- command line -------------------------------------------------------------

def test_cli_run(capsys):
    assert cli.main(["run", "corpus:leftShiftNode32", "--arg", "32:2", "--arg", "32:2"]) == 0
    assert capsys.readouterr().out.strip() == "i32:8"
    assert cli.main(["run", "corpus:leftShiftNode32", "--arg", "32:2", "--arg", "32:2",
                     "--expect", "32:9"]) == 1


def test_cli_run_error(capsys):
    assert cli.main(["run", "corpus:helper_call", "--method", "divPlusOne",
                     "--arg", "32:1", "--arg", "32:0"]) == 2
    assert "SignedDiv by zero" in capsys.readouterr().err
    assert cli.main(["run", "corpus:helper_call"]) == 2


def test_cli_opt_and_equiv(tmp_path, capsys):
    out = tmp_path / "opt.json"
    assert cli.main(["opt", "corpus:test1", "--phase", "condelim", "--out", str(out)]) == 0
    golden = corpus.load("test1").golden("test1", ["CondElim"])
    assert structurally_equivalent(load_program(out).methods["test1"], golden)
    assert cli.main(["equiv", str(out), "corpus:test1"]) == 1
    assert "first difference" in capsys.readouterr().err


def test_cli_equiv_ignore_stamps():
    assert cli.main(["equiv", "corpus:test1", "corpus:test1", "--ignore-stamps"]) == 0


def test_cli_gentests_then_difftest(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert cli.main(["gentests", "--op", "SignedRem", "--bits", "64", "--out", str(out)]) == 0
    assert cli.main(["difftest", str(out)]) == 0
    assert "72 tests: 72 passed" in capsys.readouterr().out


def test_cli_difftest_json(capsys):
    assert cli.main(["difftest", "corpus:test1", "--phases", "condelim,canonicalize",
                     "--jobs", "4", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["summary"]["failed"] == 0 and data["summary"]["passed"] == 88


def test_cli_corpus(capsys, tmp_path):
    assert cli.main(["corpus"]) == 0
    assert "leftShiftNode32" in capsys.readouterr().out.split()
    out = tmp_path / "c.json"
    assert cli.main(["corpus", "loop_sum", "--out", str(out)]) == 0
    assert load_program(out) == corpus.load("loop_sum")


def test_cli_bad_phase(capsys):
    assert cli.main(["opt", "corpus:test1", "--phase", "inline"]) == 2
    assert "unknown phase" in capsys.readouterr().err
