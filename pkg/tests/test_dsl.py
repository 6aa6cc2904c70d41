import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noetherian.dsl import (BinOp, Call, CompileError, DSLSyntaxError, Lit, Pow, Var, compile_expr, compile_program,
                            parse, parse_program, replay, to_text)
from noetherian.evaluate import Evaluator
from noetherian.poly import ComplexBox

UNIT = ComplexBox([0], [1])


def compiled(text, coords=("x",), domain=UNIT, **kw):
    return compile_expr(parse(text), coords, domain, **kw)


def test_parse_shapes():
    e = parse("pell(z) * 12")
    assert isinstance(e, BinOp) and e.op == "*"
    assert e.left == Call("pell", (Var("z"),)) and e.right == Lit(Fraction(12))
    e = parse("sin(x^2)")
    assert e == Call("sin", (Pow(Var("x"), 2),))
    e = parse("1/(jfun(tau)-1728)")
    assert e.op == "/" and e.right.op == "-"


@pytest.mark.parametrize("text, column", [("x +", 4), ("sin(x", 6), ("x ^ y", 5), ("2 * * x", 5)])
def test_syntax_errors_carry_position(text, column):
    with pytest.raises(DSLSyntaxError) as err:
        parse(text)
    assert err.value.line == 1 and err.value.column == column
    assert err.value.to_dict()["error"] == "syntax"


def test_compile_params():
    assert compiled("exp(x)*sin(x)").params == (1, 3, 1, 2)
    assert compiled("exp(exp(x))").params == (1, 2, 2, 1)
    rep = compiled("x")
    assert rep.params == (1, 0, 0, 1)


def test_compiled_value_matches_numpy():
    rep = compiled("exp(x)*sin(x) + 1/(2 + cos(x))")
    pts = np.array([[0.1], [0.4 - 0.3j], [-0.6j]])
    got = Evaluator(rep.chain).function_values(rep.function, pts)
    z = pts[:, 0]
    assert np.max(np.abs(got - (np.exp(z) * np.sin(z) + 1 / (2 + np.cos(z))))) < 1e-12


def test_division_policy_is_recorded():
    rep = compiled("1/(2+x)")
    (d,) = rep.eps_decisions
    assert d["policy"] == "auto" and d["eps"] == pytest.approx(0.5)


def test_division_without_certifiable_eps():
    with pytest.raises(CompileError):
        compiled("1/x")


def test_domain_violation_and_unknown_names():
    with pytest.raises(CompileError):
        compiled("pell(z)", ("z",), ComplexBox([0.5], [1]))
    with pytest.raises(CompileError):
        compiled("foo(x)")
    with pytest.raises(CompileError):
        compiled("x + q")


def test_log_replays_to_reported_params():
    rep = compiled("exp(x)^2*sin(x) - diff(exp(exp(x)), x)")
    again = replay(rep.log)
    for entry in rep.log:
        assert tuple(entry["params"]) == again[entry["id"]]


def test_report_is_deterministic():
    a = compiled("sin(x^2) + exp(x)/3").to_json(sort_keys=True)
    b = compiled("sin(x^2) + exp(x)/3").to_json(sort_keys=True)
    assert a == b
    assert json.loads(a)["params"]["ell"] == 3


def test_program_declarations():
    text = ("let f = exp(x) on domain(x: 0, 1)\n"
            "let g = f*f - 1 on domain(x: 0, 1) at basepoint(x: 1/2)\n")
    decls = parse_program(text)
    assert [d.name for d in decls] == ["f", "g"]
    assert decls[1].basepoint == (Fraction(1, 2),)
    reps = compile_program(text)
    g = reps["g"].function
    assert g.chain.basepoint == (0.5,)
    assert parse_program(decls[1].to_text())[0].expr == decls[1].expr


def test_program_errors():
    with pytest.raises(DSLSyntaxError):
        parse_program("let f = x on domain(x: 0, 0)\n")
    with pytest.raises(DSLSyntaxError):
        parse_program("let f = x on domain(x: 0, 1) let g = x on domain(x: 0, 1)\n")
    with pytest.raises(DSLSyntaxError) as err:
        parse_program("let f = x on domain(x: 0, 1)\nlet g = x on domain(x: 0, 1) at basepoint(y: 0)\n")
    assert err.value.line == 2


# print/parse round trip on random expressions ---------------------------

names = st.sampled_from(["x", "y", "tau"])
funcs = st.sampled_from(["exp", "sin", "cos", "pell"])
lits = st.fractions(min_value=0, max_value=50, max_denominator=9).map(Lit)
leaves = st.one_of(lits, names.map(Var))


def extend(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Pow, children, st.integers(1, 5)),
        st.builds(lambda f, a: Call(f, (a,)), funcs, children),
    )


exprs = st.recursive(leaves, extend, max_leaves=12)


@given(exprs)
def test_print_parse_round_trip(e):
    assert parse(to_text(e)) == e
