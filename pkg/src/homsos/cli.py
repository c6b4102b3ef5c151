"""Problem-file parser, command-line front end and JSON report emitter.

Problem file grammar (one statement per line, ``#`` starts a comment):

    vars: x1 x2
    minimize: x1 + x2
    subject_to:
    x1^3 + x2 + 1 >= 0
    x2^3 - x1 + 1 == 0

Expressions support ``+ - * ^`` with nonnegative integer exponents,
parentheses and decimal literals.  Implicit multiplication is not allowed.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import driver, relax
from .poly import Polynomial, PopProblem


class ProblemParseError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<num>\d+\.\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?|\d+([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
  | (?P<ws>\s+)
  | (?P<bad>.)
""", re.VERBOSE)


def _tokenize(text, line_no, col_offset=0):
    tokens = []
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise ProblemParseError(f"unexpected character {m.group()!r}",
                                    line_no, col_offset + m.start() + 1)
        tokens.append((kind, m.group(), col_offset + m.start() + 1))
    return tokens


class _ExprParser:
    """Recursive descent over + - * ^ ( ) with declared variables only."""

    def __init__(self, tokens, variables, line_no):
        self.tokens = tokens
        self.pos = 0
        self.vars = variables
        self.line = line_no

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is None:
            raise ProblemParseError("unexpected end of expression", self.line,
                                    self.tokens[-1][2] if self.tokens else 1)
        self.pos += 1
        return tok

    def parse(self):
        expr = self._expr()
        tok = self._peek()
        if tok is not None:
            raise ProblemParseError(
                f"unexpected token {tok[1]!r} (implicit multiplication is "
                "not allowed)", self.line, tok[2])
        return expr

    def _expr(self):
        tok = self._peek()
        if tok and tok[1] in "+-":
            self.pos += 1
            term = self._term()
            acc = term if tok[1] == "+" else -term
        else:
            acc = self._term()
        while True:
            tok = self._peek()
            if tok is None or tok[1] not in "+-":
                return acc
            self.pos += 1
            term = self._term()
            acc = acc + term if tok[1] == "+" else acc - term

    def _term(self):
        acc = self._factor()
        while True:
            tok = self._peek()
            if tok is None or tok[1] != "*":
                return acc
            self.pos += 1
            acc = acc * self._factor()

    def _factor(self):
        base = self._base()
        tok = self._peek()
        if tok is not None and tok[1] == "^":
            self.pos += 1
            kind, text, col = self._next()
            if kind != "num" or not re.fullmatch(r"\d+", text):
                raise ProblemParseError(
                    f"exponent must be a nonnegative integer, got {text!r}",
                    self.line, col)
            return base ** int(text)
        return base

    def _base(self):
        kind, text, col = self._next()
        n = len(self.vars)
        if kind == "num":
            return Polynomial.constant(n, float(text))
        if kind == "name":
            if text not in self.vars:
                raise ProblemParseError(f"undeclared variable {text!r}",
                                        self.line, col)
            return Polynomial.variable(n, self.vars.index(text))
        if text == "(":
            expr = self._expr()
            kind2, text2, col2 = self._next()
            if text2 != ")":
                raise ProblemParseError("expected ')'", self.line, col2)
            return expr
        if text == "-":
            return -self._factor()
        if text == "+":
            return self._factor()
        raise ProblemParseError(f"unexpected token {text!r}", self.line, col)


def _parse_expression(text, variables, line_no, col_offset=0):
    tokens = _tokenize(text, line_no, col_offset)
    if not tokens:
        raise ProblemParseError("empty expression", line_no, col_offset + 1)
    return _ExprParser(tokens, variables, line_no).parse()


def parse_problem(text: str):
    """Parse problem text into a ``PopProblem``; returns (problem, var names,
    constraint relations in file order)."""
    variables = None
    objective = None
    in_constraints = False
    equalities, inequalities = [], []
    relations = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        line = content.strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered.startswith("vars:"):
            names = line[5:].split()
            if not names:
                raise ProblemParseError("no variables declared", line_no, 6)
            if len(set(names)) != len(names):
                raise ProblemParseError("duplicate variable name", line_no, 6)
            variables = names
            continue
        if lowered.startswith("minimize:"):
            if variables is None:
                raise ProblemParseError("'vars:' must come before 'minimize:'",
                                        line_no, 1)
            head = re.match(r"\s*minimize:", content, re.IGNORECASE)
            body = content[head.end():]
            if not body.strip():
                raise ProblemParseError("empty objective", line_no,
                                        head.end() + 1)
            objective = _parse_expression(body, variables, line_no, head.end())
            continue
        if lowered.startswith("subject_to:"):
            if line[11:].strip():
                raise ProblemParseError("constraints must follow on their own "
                                        "lines", line_no, 12)
            in_constraints = True
            continue
        if not in_constraints:
            raise ProblemParseError(f"unexpected statement {line!r}", line_no, 1)
        m = re.search(r"(>=|==)", content)
        if not m:
            raise ProblemParseError("constraint must contain '>= 0' or '== 0'",
                                    line_no, 1)
        lhs, rel, rhs = content[:m.start()], m.group(), content[m.end():]
        if rhs.strip() != "0":
            raise ProblemParseError("constraint right-hand side must be 0",
                                    line_no, m.end() + 1)
        expr = _parse_expression(lhs, variables, line_no)
        relations.append(rel)
        (equalities if rel == "==" else inequalities).append(expr)
    if variables is None:
        raise ProblemParseError("missing 'vars:' line", 1, 1)
    if objective is None:
        raise ProblemParseError("missing 'minimize:' line", 1, 1)
    prob = PopProblem(len(variables), objective, tuple(equalities),
                      tuple(inequalities))
    return prob, variables, relations


def format_problem(prob: PopProblem, varnames) -> str:
    """Render a problem back into the file grammar (parse round-trips)."""
    lines = ["vars: " + " ".join(varnames),
             "minimize: " + prob.objective.to_string(varnames)]
    if prob.equalities or prob.inequalities:
        lines.append("subject_to:")
        for c in prob.equalities:
            lines.append(c.to_string(varnames) + " == 0")
        for c in prob.inequalities:
            lines.append(c.to_string(varnames) + " >= 0")
    return "\n".join(lines) + "\n"


_KINDS = {"homog": relax.HOMOGENIZED, "even": relax.HOMOGENIZED_EVEN,
          "denom": relax.DENOMINATOR, "standard": relax.STANDARD}


def _parse_kind(text):
    if text in _KINDS:
        return _KINDS[text]
    m = re.fullmatch(r"power:(\d+)", text)
    if m:
        return relax.power_x0(int(m.group(1)))
    raise argparse.ArgumentTypeError(
        f"unknown kind {text!r}; expected homog|even|denom|power:L|standard")


def _build_argparser():
    ap = argparse.ArgumentParser(
        prog="homsos",
        description="Moment-SOS solver for polynomial optimization over "
                    "possibly unbounded semialgebraic sets.")
    ap.add_argument("problem", help="path to a problem file, or '-' for stdin")
    ap.add_argument("--order", type=int, default=None,
                    help="solve a single relaxation order")
    ap.add_argument("--max-order", type=int, default=None,
                    help="run the hierarchy up to this order")
    ap.add_argument("--kind", type=_parse_kind, default=relax.HOMOGENIZED,
                    help="relaxation kind: homog|even|denom|power:L|standard")
    ap.add_argument("--infinity", action="store_true",
                    help="solve for minimizers at infinity instead")
    ap.add_argument("--tol-gap", type=float, default=1e-8)
    ap.add_argument("--tol-rank", type=float, default=1e-6)
    ap.add_argument("--tol-atom", type=float, default=1e-4)
    fmt = ap.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", default=True,
                     help="emit the JSON report (default)")
    fmt.add_argument("--pretty", action="store_true",
                     help="emit a human-readable summary instead of JSON")
    ap.add_argument("--dump-sdpa", metavar="PATH", default=None,
                    help="write the assembled SDP in SDPA sparse format")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-verify", action="store_true",
                    help="skip optimality-condition gating of early stops")
    return ap


def _echo(prob, varnames, relations):
    cons = [c.to_string(varnames) + " == 0" for c in prob.equalities]
    cons += [c.to_string(varnames) + " >= 0" for c in prob.inequalities]
    return {"vars": list(varnames),
            "minimize": prob.objective.to_string(varnames),
            "constraints": cons}


def _pretty_report(report: dict, out):
    print("records:", file=out)
    for rec in report["records"]:
        print(f"  k={rec['k']} kind={rec['kind']} status={rec['status']} "
              f"f_k={rec['f_k']} f_k'={rec['f_k_prime']} flat_t={rec['flat_t']}",
              file=out)
        for mz in rec["minimizers"]:
            pt = ", ".join(f"{v:.6f}" for v in mz["point"])
            print(f"    minimizer ({pt}) value {mz['value']:.6f}", file=out)
        for mz in rec["minimizers_at_infinity"]:
            pt = ", ".join(f"{v:.6f}" for v in mz["point"])
            print(f"    minimizer at infinity ({pt})", file=out)
    final = report["final"]
    print(f"final: bound={final['best_bound']} converged={final['converged']} "
          f"order={final['convergence_order']}", file=out)
    print(f"diagnosis: {final['diagnosis']}", file=out)


def run(argv, out=None, err=None) -> int:
    """CLI entry; returns the exit code (0 ok, 2 parse error, 3 solver
    failure at every order)."""
    out = out or sys.stdout
    err = err or sys.stderr
    ap = _build_argparser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.order is not None and args.max_order is not None:
        print("error: --order and --max-order are mutually exclusive", file=err)
        return 2
    try:
        if args.problem == "-":
            text = sys.stdin.read()
        else:
            with open(args.problem) as fh:
                text = fh.read()
        prob, varnames, relations = parse_problem(text)
    except (OSError, ProblemParseError) as exc:
        print(f"error: {exc}", file=err)
        return 2

    k_single = args.order
    k_max = args.max_order if args.max_order is not None else k_single
    opts = driver.DriverOptions(
        kind=args.kind, gap_tol=args.tol_gap, rank_tol=args.tol_rank,
        atom_feas_tol=args.tol_atom, tau_tol=args.tol_atom,
        verify=not args.no_verify, seed=args.seed, dump_sdpa=args.dump_sdpa,
        k_min=k_single, k_max=k_max)

    if args.infinity:
        k = k_single or k_max or driver.default_k_min(
            driver.sphere_restriction(prob), relax.STANDARD)
        inf_report = driver.minimizers_at_infinity(prob, k, opts)
        rec = {"k": inf_report.k, "kind": "standard(sphere)",
               "status": inf_report.status, "f_k": inf_report.cert_bound,
               "f_k_prime": inf_report.bound, "flat_t": inf_report.flat_t,
               "flat_gap": inf_report.flat_gap, "minimizers": [],
               "minimizers_at_infinity": [
                   {"point": [float(v) for v in p]} for p in inf_report.points],
               "optcond": [r.to_dict() for r in inf_report.optcond],
               "certificate_residual": None,
               "solver_message": inf_report.notes, "notes": ""}
        ok = inf_report.status == "optimal"
        report = {"problem_echo": _echo(prob, varnames, relations),
                  "records": [rec],
                  "final": {"best_bound": inf_report.bound,
                            "converged": ok and bool(inf_report.points),
                            "convergence_order": inf_report.k if ok else None,
                            "diagnosis": "minimizers-at-infinity solve"}}
        code = 0 if ok else 3
    else:
        hierarchy = driver.solve_pop(prob, opts)
        report = {"problem_echo": _echo(prob, varnames, relations)}
        report.update(hierarchy.to_dict())
        solved = any(r.status == "optimal" for r in hierarchy.records)
        code = 0 if solved else 3

    if args.pretty:
        _pretty_report(report, out)
    else:
        json.dump(report, out, indent=2)
        out.write("\n")
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
