import io
import json

import numpy as np
import pytest

from homsos import cli
from homsos.cli import ProblemParseError, format_problem, parse_problem
from homsos.poly import Polynomial, PopProblem

CUBIC_TEXT = """\
vars: x1 x2
minimize: x1 + x2
subject_to:
x1^3 + x2 + 1 >= 0
x2^3 - x1 + 1 >= 0
"""


def test_parse_cubic_example():
    prob, names, relations = parse_problem(CUBIC_TEXT)
    assert names == ["x1", "x2"]
    assert relations == [">=", ">="]
    assert prob.objective.terms == {(1, 0): 1.0, (0, 1): 1.0}
    assert prob.inequalities[0].terms == {(3, 0): 1.0, (0, 1): 1.0, (0, 0): 1.0}
    assert prob.inequalities[1].terms == {(0, 3): 1.0, (1, 0): -1.0, (0, 0): 1.0}
    assert prob.equalities == ()


def test_parse_univariate_unconstrained():
    prob, names, _ = parse_problem("vars: x\nminimize: x^2\n")
    assert names == ["x"]
    assert prob.objective.terms == {(2,): 1.0}
    assert prob.inequalities == () and prob.equalities == ()


def test_parse_missing_vars_line():
    with pytest.raises(ProblemParseError) as exc:
        parse_problem("minimize: x1\n")
    assert exc.value.line == 1


def test_parse_undeclared_variable():
    with pytest.raises(ProblemParseError, match="undeclared"):
        parse_problem("vars: x\nminimize: x + y\n")


def test_parse_bad_exponent():
    with pytest.raises(ProblemParseError, match="exponent"):
        parse_problem("vars: x\nminimize: x^-2\n")
    with pytest.raises(ProblemParseError, match="exponent"):
        parse_problem("vars: x\nminimize: x^1.5\n")


def test_parse_rejects_implicit_multiplication():
    with pytest.raises(ProblemParseError, match="implicit"):
        parse_problem("vars: x y\nminimize: 2 x\n")


def test_parse_empty_objective():
    with pytest.raises(ProblemParseError, match="empty objective"):
        parse_problem("vars: x\nminimize:\n")


def test_parse_constraints_and_comments():
    text = """# a comment
vars: x y   # trailing comment
minimize: (x - 1)^2 + y^2
subject_to:
x - y == 0
-x + 2.5 >= 0
"""
    prob, _, relations = parse_problem(text)
    assert relations == ["==", ">="]
    assert prob.equalities[0].terms == {(1, 0): 1.0, (0, 1): -1.0}
    assert prob.inequalities[0].terms == {(1, 0): -1.0, (0, 0): 2.5}


def test_parse_error_positions():
    with pytest.raises(ProblemParseError) as exc:
        parse_problem("vars: x\nminimize: x + @\n")
    assert exc.value.line == 2
    assert exc.value.col >= 14


def test_print_parse_round_trip():
    rng = np.random.default_rng(23)
    from homsos.poly import monomial_basis
    monos = monomial_basis(3, 4)
    for _ in range(5):
        picks = rng.choice(len(monos), size=6, replace=False)
        f = Polynomial(3, {monos[i]: rng.uniform(-3, 3) for i in picks})
        g = Polynomial(3, {monos[i]: rng.standard_normal()
                           for i in rng.choice(len(monos), size=3, replace=False)})
        prob = PopProblem(3, f, (g,), (g + 1.0,))
        text = format_problem(prob, ["x1", "x2", "x3"])
        back, _, _ = parse_problem(text)
        assert back.objective.terms == prob.objective.terms
        assert back.equalities[0].terms == prob.equalities[0].terms
        assert back.inequalities[0].terms == prob.inequalities[0].terms


def run_cli(args):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(args, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_run_malformed_file(tmp_path):
    path = tmp_path / "bad.pop"
    path.write_text("minimize: x1\n")
    code, out, err = run_cli([str(path)])
    assert code == 2
    assert "line 1" in err


def test_run_missing_file():
    code, _, err = run_cli(["/nonexistent/problem.pop"])
    assert code == 2


def test_run_conflicting_orders(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text(CUBIC_TEXT)
    code, _, err = run_cli([str(path), "--order", "2", "--max-order", "3"])
    assert code == 2
    assert "mutually exclusive" in err


def test_run_json_schema_and_determinism(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text(CUBIC_TEXT)
    code1, out1, _ = run_cli([str(path), "--order", "3", "--seed", "5"])
    code2, out2, _ = run_cli([str(path), "--order", "3", "--seed", "5"])
    assert code1 == code2 == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert set(rep) == {"problem_echo", "records", "final"}
    rec = rep["records"][0]
    for field in ("k", "kind", "f_k", "f_k_prime", "status", "flat_t",
                  "minimizers", "minimizers_at_infinity", "optcond"):
        assert field in rec
    assert rep["problem_echo"]["vars"] == ["x1", "x2"]
    assert rep["final"]["best_bound"] == pytest.approx(-1.3849001794597505,
                                                       abs=1e-4)


def test_run_pretty_output(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text("vars: x\nminimize: x^2\n")
    code, out, _ = run_cli([str(path), "--max-order", "2", "--pretty"])
    assert code == 0
    assert "converged=True" in out
    assert "minimizer (" in out


def test_run_solver_failure_exit_code(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text("vars: x1 x2\nminimize: x1^4 + (x1*x2 - 1)^2\n")
    code, out, _ = run_cli([str(path), "--order", "3"])
    assert code == 3
    rep = json.loads(out)
    assert "optimum likely unattained" in rep["final"]["diagnosis"]


def test_run_dump_sdpa(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text("vars: x\nminimize: x^2\n")
    dump = tmp_path / "inst.dat-s"
    code, _, _ = run_cli([str(path), "--order", "1", "--dump-sdpa", str(dump)])
    assert code == 0
    lines = dump.read_text().strip().splitlines()
    assert len(lines) > 4
    assert all(len(l.split()) == 5 for l in lines[4:])


def test_run_infinity_mode(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text("vars: x1 x2\nminimize: x2^2 + (2*x2^2 + 2*x1*x2 + 1)^2\n")
    code, out, _ = run_cli([str(path), "--infinity", "--order", "3"])
    assert code == 0
    rep = json.loads(out)
    pts = [m["point"] for m in rep["records"][0]["minimizers_at_infinity"]]
    assert len(pts) == 4
    assert abs(rep["final"]["best_bound"]) < 1e-6


def test_kind_flag_parsing(tmp_path):
    path = tmp_path / "p.pop"
    path.write_text("vars: x\nminimize: x^4 - x^2\n")
    code, out, _ = run_cli([str(path), "--order", "2", "--kind", "even"])
    assert code == 0
    assert json.loads(out)["records"][0]["kind"] == "homogenized_even"
    code, out, _ = run_cli([str(path), "--order", "3", "--kind", "power:1"])
    assert code in (0, 3)
    assert json.loads(out)["records"][0]["kind"] == "power_x0(1)"


def test_cross_kind_agreement_via_cli(tmp_path):
    path = tmp_path / "even.pop"
    path.write_text("vars: x\nminimize: x^4 - x^2\n")
    vals = {}
    for kind in ("even", "denom"):
        code, out, _ = run_cli([str(path), "--order", "3", "--kind", kind])
        assert code == 0
        vals[kind] = json.loads(out)["records"][0]["f_k_prime"]
    assert abs(vals["even"] - vals["denom"]) <= 1e-6 * (1.0 + abs(vals["denom"]))


def test_run_reads_stdin(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("vars: x\nminimize: x^2\n"))
    code, out, _ = run_cli(["-", "--max-order", "2"])
    assert code == 0
    assert json.loads(out)["final"]["converged"] is True
