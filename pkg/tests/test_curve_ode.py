import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from noetherian.bernstein import Disc, count_zeros_disc
from noetherian.curve_ode import (AlgebraicCurve, annihilator, annulus_clear, branch_monodromy, count_zeros_on_curve,
                                  exclusion_points, good_annulus, min_leading_on_annulus, restriction_system, slope)
from noetherian.dsl import compile_program
from noetherian.errors import PreconditionError
from noetherian.poly import Polynomial

y, t = sp.symbols("y t")


def coeffs(L):
    return [sp.Poly(c, t).as_expr() for c in L.coefficients]


def test_annihilator_of_square_root():
    L = annihilator(y ** 2 - t)
    assert L.order == 1
    assert coeffs(L) == [t, sp.Rational(-1, 2)]


def test_annihilator_of_explicit_polynomial():
    L = annihilator(y - t ** 2)
    assert L.order == 1
    assert coeffs(L) == [t, -2]


def test_annihilator_accepts_polynomials():
    L = annihilator(Polynomial.parse("y^2 - t"))
    assert coeffs(L) == [t, sp.Rational(-1, 2)]


def test_annihilator_family_is_uniform():
    ops = [annihilator(y ** 2 + e * t) for e in (1, sp.Rational(1, 1000), sp.Rational(1, 10 ** 6))]
    assert all(coeffs(L) == [t, sp.Rational(-1, 2)] for L in ops)
    assert len({slope(L) for L in ops}) == 1


def test_annihilator_refusals():
    with pytest.raises(PreconditionError):
        annihilator((y - t) ** 2)
    with pytest.raises(PreconditionError):
        annihilator(t ** 2 - 1)


def test_cubic_has_second_order_operator():
    L = annihilator(y ** 3 - t * y - 1)
    assert L.order == 2
    roots = np.roots([1, 0, -0.3, -1])
    # numeric check on every branch at t=0.3 via the jet forms
    a = [complex(sp.lambdify(t, c)(0.3)) for c in coeffs(L)]
    for r in roots:
        h = 1e-4
        br = lambda s: np.roots([1, 0, -s, -1])[np.argmin(np.abs(np.roots([1, 0, -s, -1]) - r))]
        d1 = (br(0.3 + h) - br(0.3 - h)) / (2 * h)
        d2 = (br(0.3 + h) - 2 * r + br(0.3 - h)) / h ** 2
        assert abs(a[0] * d2 + a[1] * d1 + a[2] * r) < 1e-5


def test_slope_examples():
    assert slope(annihilator(y ** 2 - t)) == Fraction(1, 2)
    from noetherian.curve_ode import ScalarODE
    L = ScalarODE([sp.Poly(1, t, domain=sp.QQ), sp.Poly(-3, t, domain=sp.QQ), sp.Poly(2, t, domain=sp.QQ)])
    assert slope(L) == 3
    assert slope(ScalarODE([sp.Poly(1, t, domain=sp.QQ), sp.Poly(0, t, domain=sp.QQ)])) == 0


@settings(max_examples=25)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=4), st.lists(st.integers(-2, 2), min_size=2, max_size=3))
def test_annihilator_kills_every_branch(cy, ct):
    # P = y^d + (random poly in t) * y + (random poly in t); squarefree for generic data
    d = len(cy)
    P = y ** d + sum(c * y ** i for i, c in enumerate(cy[:-1])) + sum(c * t ** (i + 1) for i, c in enumerate(ct))
    if sp.degree(sp.gcd(P, sp.diff(P, y)), y) > 0:
        return
    L = annihilator(P)  # raises on a failed symbolic check
    assert L.order <= d
    assert max(abs(c) for c in sp.Poly(L.coefficients[0], t).coeffs()) == 1


def plane(text):
    return AlgebraicCurve([Polynomial.parse(text)], ("x", "y"))


def test_good_annulus_examples():
    for text in ("y^2 - x", "y - x", "y^2 - x + 3/5"):
        C = plane(text)
        r, rho, rep = good_annulus(C)
        assert 0.5 <= r - rho and r + rho <= 0.75
        pts = exclusion_points(C)
        assert annulus_clear(r, rho, pts, delta=rep["exclusion_radius"])
    r, rho, _ = good_annulus(plane("y^2 - x + 3/5"))
    assert not (r - rho <= 0.6 <= r + rho)
    assert exclusion_points(plane("y - x")) == []


def test_leading_coefficient_bounded_below_on_annulus():
    C = plane("y^2 - x")
    r, rho, _ = good_annulus(C)
    assert min_leading_on_annulus(C, r, rho) == pytest.approx(r - rho, rel=1e-9)


def test_monodromy_swaps_square_root_branches():
    assert branch_monodromy(y ** 2 - t, 0.6) == [1, 0]
    assert sorted(branch_monodromy(y ** 3 - t, 0.6)) == [0, 1, 2]
    assert branch_monodromy(y ** 3 - t, 0.6) != [0, 1, 2]
    # a loop avoiding the branch point leaves the branches alone
    assert branch_monodromy(y ** 2 - t, 0.3, center=1) == [0, 1]


@pytest.fixture(scope="module")
def exp_y():
    return compile_program("let g = exp(y) - 2 on domain(x: 0, 3; y: 0, 3)\n")["g"].function


def test_restriction_system_on_parabola(exp_y):
    S = restriction_system(exp_y.chain, plane("y^2 - x"))
    assert S.N == 3
    assert S.report["orders"] == {"y": 1}
    rules = dict(zip(S.roster, S.rules))
    X, Q, E = (Polynomial.var(v).with_variables(S.variables) for v in S.roster)
    half = Fraction(1, 2)
    assert rules["x_y_0"] == half * Q * X
    assert rules["Q_y"] == -(Q * Q)
    assert rules[S.roster[2]] == half * Q * X * E
    assert S.residual(0.5, np.array([0.5, math.sqrt(0.5)])) < 1e-8
    assert S.residual(0.4 + 0.2j, np.array([0.4 + 0.2j, np.sqrt(0.4 + 0.2j)])) < 1e-8


def test_restriction_system_on_a_line_is_the_chain(exp_y):
    S = restriction_system(exp_y.chain, plane("y - x"))
    assert S.N == 1 and S.rules[0].to_text() == "1*" + S.roster[0]
    assert S.residual(0.3, np.array([0.3, 0.3])) < 1e-8


def test_zero_count_on_a_line(exp_y):
    rep = count_zeros_on_curve(exp_y, plane("y - x"), [0.7, 0.7], 0.5)
    assert rep["count"] == 1 and rep["holds"]
    assert rep["pipeline"]["subadditivity_holds"]


def test_zero_count_on_parabola(exp_y):
    ln2 = math.log(2)
    rep = count_zeros_on_curve(exp_y, plane("y^2 - x"), [ln2 ** 2, ln2], 0.4)
    assert rep["count"] == 1 and rep["holds"]


def test_zero_count_refuses_identically_zero():
    F = compile_program("let g = y - x on domain(x: 0, 3; y: 0, 3)\n")["g"].function
    with pytest.raises(PreconditionError):
        count_zeros_on_curve(F, plane("y - x"), [0.5, 0.5], 0.5)


def test_zero_count_with_weierstrass_p_matches_argument_principle():
    g = compile_program("let g = pell(z) on domain(z: 1/2, 2/5)\n")["g"].function
    from noetherian.evaluate import Evaluator
    c = Evaluator(g.chain).function_values(g, np.array([[0.55]]))[0].real
    F = compile_program(f"let g = pell(x) - {c:.6f} on domain(x: 1/2, 2/5; y: 1/2, 2/5)\n")["g"].function
    rep = count_zeros_on_curve(F, plane("y - x"), [0.55, 0.55], 0.1)
    P = rep["polydisc"]
    center = complex(*P["origin"][0]) + complex(*P["base_center"][0])
    one = compile_program(f"let g = pell(z) - {c:.6f} on domain(z: 1/2, 2/5)\n")["g"].function
    assert rep["count"] == count_zeros_disc(one, Disc(center, P["base_radii"][0])) == 1
