import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noetherian.catalog import CATALOG
from noetherian.chain import NoetherianChain, RationalSystem
from noetherian.closure import (combine, compose, compositional_inverse, depolarize, derivative, implicit, invert,
                                union, union_functions)
from noetherian.errors import PreconditionError
from noetherian.evaluate import Evaluator
from noetherian.poly import ComplexBox, Polynomial

P = Polynomial.parse


def values(f, pts):
    pts = np.asarray(pts, dtype=complex).reshape(-1, f.chain.n)
    return Evaluator(f.chain).function_values(f, pts)


def disc_points(rng, count, radius=0.9):
    r = radius * np.sqrt(rng.random(count))
    return r * np.exp(2j * np.pi * rng.random(count))


def test_union_params(exp_chain, sincos_chain):
    assert union(exp_chain, exp_chain)[0].params == (1, 2, 1)
    assert union(exp_chain, sincos_chain)[0].params == (1, 3, 1)


def test_derivative_params(exp_chain):
    y = exp_chain.function(P("y1"))
    d = derivative(y, 0)
    assert d.poly == P("y1").with_variables(d.poly.variables) and d.beta == 1
    x = exp_chain.function(P("x"))
    assert derivative(x, "x").poly == P("1").with_variables(exp_chain.all_variables)
    assert derivative(x, "x").beta == 1  # max(0, 1 + 1 - 1)
    sq = derivative(exp_chain.function(P("y1^2")), 0)
    assert sq.poly.trimmed() == P("2*y1^2") and sq.beta == 2


def test_combine_params(exp_chain):
    y, x = exp_chain.function(P("y1")), exp_chain.function(P("x"))
    assert combine(y, x, "add").beta == 1
    assert combine(y, y, "mul").beta == 2
    one = exp_chain.function(P("1"))
    assert combine(y, one, "mul").poly == y.poly


def test_invert_params_and_refusal(exp_chain):
    y = exp_chain.function(P("y1"))
    assert invert(y, eps=1 / math.e).params[:3] == (1, 2, 3)
    two = exp_chain.function(P("2"))
    assert two.beta == 0
    assert invert(two).params[:3] == (1, 2, 2)
    with pytest.raises(PreconditionError) as err:
        invert(exp_chain.function(P("x")), eps=0.1)
    assert "point" in err.value.witness


def test_double_inverse_round_trip(exp_chain, rng):
    y = exp_chain.function(P("y1"))
    back = invert(invert(y))
    pts = disc_points(rng, 100)
    assert np.max(np.abs(values(back, pts) - np.exp(pts))) < 1e-12


def test_compose_exp_exp(exp_chain, rng):
    y = exp_chain.function(P("y1"))
    g = compose([y], y)
    assert g.params[:3] == (1, 2, 2)
    pts = disc_points(rng, 20, 0.5)
    assert np.max(np.abs(values(g, pts) - np.exp(np.exp(pts)))) < 1e-10


def test_compose_with_identity(exp_chain, rng):
    y = exp_chain.function(P("y1"))
    trivial = NoetherianChain(("x",), [], ComplexBox([0], [3]), (0,), ())
    ident = trivial.function(P("x"))
    h = compose([y], ident)
    pts = disc_points(rng, 10)
    assert np.max(np.abs(values(h, pts) - np.exp(pts))) < 1e-12


def test_sin_of_square(sincos_chain):
    trivial = NoetherianChain(("x",), [], ComplexBox([0], [1]), (0,), ())
    sq = trivial.function(P("x^2"))
    g = compose([sq], sincos_chain.function(P("y1")))
    assert g.params[:3] == (1, 2, 2)
    assert values(g, [0.5])[0] == pytest.approx(math.sin(0.25), abs=1e-13)


def test_inverse_of_exp_is_log():
    chain, _ = CATALOG["exp"].build(basepoint=(1,), radius=0.2)
    inv, (log,) = compositional_inverse([chain.function(P("y1"))])
    assert values(log, [math.e])[0] == pytest.approx(1, abs=1e-10)
    # round trip on 50 samples of the source disc
    rng = np.random.default_rng(5)
    xs = 1 + 0.1 * np.sqrt(rng.random(50)) * np.exp(2j * np.pi * rng.random(50))
    assert np.max(np.abs(values(log, np.exp(xs)) - xs)) < 1e-10


def test_inverse_of_translation():
    trivial = NoetherianChain(("x",), [], ComplexBox([0], [1]), (0,), ())
    inv, (g,) = compositional_inverse([trivial.function(P("x + 3"))])
    assert values(g, [3.5])[0] == pytest.approx(0.5, abs=1e-12)


def test_implicit_graph_of_exp():
    exp2 = NoetherianChain(("x", "y"), [[P("y1"), P("0")]], ComplexBox([0, 1], [1, 2]), (0, 1), (1,))
    F = exp2.function(P("y - y1"))
    c, (G,) = implicit([F], ("y",), ComplexBox([0], [0.5]), (0, 1))
    assert values(G, [0.3])[0] == pytest.approx(math.exp(0.3), abs=1e-12)


def test_implicit_square_root():
    trivial = NoetherianChain(("x", "y"), [], ComplexBox([1, 1], [4, 2]), (1, 1), ())
    c, (G,) = implicit([trivial.function(P("y^2 - x"))], ("y",), ComplexBox([2.5], [2]), (1, 1))
    ev = Evaluator(c)
    state = ev.continue_along([np.array([4.0])])
    full = np.concatenate([state.position, state.values])
    assert G.numeric()(full) == pytest.approx(2, abs=1e-10)


def test_implicit_linear():
    trivial = NoetherianChain(("x", "y"), [], ComplexBox([0, 0], [1, 1]), (0, 0), ())
    c, (G,) = implicit([trivial.function(P("y + x"))], ("y",), ComplexBox([0], [1]), (0, 0))
    assert values(G, [0.7])[0] == pytest.approx(-0.7, abs=1e-13)


def test_depolarize_log_on_annulus_disc():
    # dphi/dx = 1/x on a disc inside the annulus 1/2 < |x| < 1
    dom = ComplexBox([0.75], [0.2])
    sys = RationalSystem(("x",), [[[(P("1"), P("x"))]]], dom, (0.75,), (math.log(0.75),))
    chain, rep = depolarize(sys, eps=0.5)
    assert rep["added_members"] == 1
    f = chain.function(P("y1"))
    pts = 0.75 + 0.15 * np.exp(2j * np.pi * np.arange(8) / 8)
    assert np.max(np.abs(values(f, pts) - np.log(pts))) < 1e-10


def test_depolarize_polynomial_rhs_is_identity(exp_chain):
    sys = RationalSystem(("x",), [[[(P("y1"), P("1"))]]], exp_chain.domain, (0,), (1,))
    chain, rep = depolarize(sys)
    assert rep["added_members"] == 0
    assert chain.params == exp_chain.params


def test_j_system_gains_two_members():
    from noetherian.catalog import j_rational_system

    chain, _ = CATALOG["jfun"].build()
    sys = j_rational_system((2j,), ComplexBox([2j], [0.5]))
    assert chain.ell == sys.ell + 2


def test_depolarize_refuses_small_denominator():
    dom = ComplexBox([0.75], [0.5])
    sys = RationalSystem(("x",), [[[(P("1"), P("x"))]]], dom, (0.75,), (math.log(0.75),))
    with pytest.raises(PreconditionError):
        depolarize(sys, eps=0.5)


def test_union_functions_share_chain(exp_chain, sincos_chain):
    f, g = union_functions(exp_chain.function(P("y1")), sincos_chain.function(P("y2")))
    assert f.chain is g.chain
    assert values(combine(f, g, "mul"), [0.4])[0] == pytest.approx(math.exp(0.4) * math.cos(0.4), abs=1e-13)


@given(st.integers(0, 3), st.integers(0, 3), st.sampled_from(["add", "sub", "mul"]))
def test_combine_matches_pointwise_arithmetic(a, b, op):
    chain, _ = CATALOG["sin"].build()
    f = chain.function(P(f"y1^{a} + x"))
    g = chain.function(P(f"y2^{b} - 1/2"))
    h = combine(f, g, op)
    pts = np.array([0.3, -0.2 + 0.4j, 0.7j])
    fv, gv = values(f, pts), values(g, pts)
    want = {"add": fv + gv, "sub": fv - gv, "mul": fv * gv}[op]
    assert np.max(np.abs(values(h, pts) - want)) < 1e-12
