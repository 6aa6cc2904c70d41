from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noetherian.errors import PrecisionError
from noetherian.poly import ComplexBox, GaussianRational, Polynomial

P = Polynomial.parse


def test_add_cancels():
    assert P("x+1") + P("-x") == P("1")


def test_difference_of_squares():
    assert P("x+y") * P("x-y") == P("x^2-y^2")


def test_product_with_zero():
    assert (P("3*x^2*y + 7") * P("0")).is_zero()


@pytest.mark.parametrize("text, norm", [("3*x^2*y - 2*y", 3), ("0", 0), ("(1+2*i)*x", 2), ("-5/3*i*x", Fraction(5, 3))])
def test_max_norm_uses_largest_component(text, norm):
    got = P(text).max_norm()
    assert got == norm and isinstance(got, Fraction)


def test_eval_examples():
    assert P("x^2+1").eval([1j]) == 0
    assert P("x+y").eval([1, 2]) == 3
    assert P("x^3").eval([1 + 1j]) == -2 + 2j
    assert P("x^3").eval_exact([GaussianRational(1, 1)]) == GaussianRational(-2, 2)


def test_eval_high_precision_and_floor():
    v = P("x^2 - 2").eval([Fraction(99, 70)], precision=200)
    assert abs(complex(v) - (Fraction(99, 70) ** 2 - 2)) < 1e-15
    with pytest.raises(PrecisionError):
        P("x").eval([1], precision=4)


def test_directional_derive_examples():
    assert P("x*y").directional_derive([P("1"), P("0")]) == P("y")
    assert P("x^2").directional_derive([P("x")]) == P("2*x^2")
    assert P("x+y").directional_derive([P("y"), P("x")]) == P("x+y")


def test_text_round_trip_and_canonical_order():
    p = P("1/3*y^2*x - (2/5+3*i)*z + 7")
    assert P(p.to_text()) == p
    assert p.variables == ("x", "y", "z")


def test_variables_align_by_name():
    s = P("x") + P("y")
    assert s.variables == ("x", "y")
    assert s.terms_in(("y", "x")) == {(1, 0): 1, (0, 1): 1}


def test_float_coefficients_refused():
    with pytest.raises(TypeError):
        Polynomial({(1,): 0.5}, ("x",))


def test_complex_box_grid_is_nested():
    box = ComplexBox([0, 1j], [1, 0.5])
    coarse = {tuple(np.round(p, 12)) for p in box.grid(1)}
    fine = {tuple(np.round(p, 12)) for p in box.grid(2)}
    assert coarse <= fine


# randomized ring properties --------------------------------------------

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gauss = st.builds(lambda a, b: GaussianRational(a, b), small, small)
exps = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(exps, st.one_of(small, gauss), max_size=5).map(lambda t: Polynomial(t, ("x", "y")))
points = st.tuples(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                   st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))


@given(polys, polys, polys)
def test_ring_axioms_exact(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + q == q + p


@given(polys, polys)
def test_degree_of_product(p, q):
    if not p.is_zero() and not q.is_zero():
        assert (p * q).degree() == p.degree() + q.degree()
    assert (p + q).degree() <= max(p.degree(), q.degree())


@given(polys, polys, points)
def test_eval_multiplicative(p, q, z):
    lhs = (p * q).eval(z)
    rhs = p.eval(z) * q.eval(z)
    bound = 1e-12 * max(1.0, abs(rhs)) * (1 + len(p) * len(q)) * 4 ** 6
    assert abs(lhs - rhs) <= bound


@given(polys, polys)
def test_max_norm_submultiplicative(p, q):
    assert (p * q).max_norm() <= 2 * len(p) * p.max_norm() * q.max_norm()


@given(polys)
def test_max_norm_zero_iff_zero(p):
    assert (p.max_norm() == 0) == p.is_zero()


@given(polys)
def test_text_round_trip(p):
    assert P(p.to_text()) == p.trimmed() or P(p.to_text()) == p
