import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noetherian.bernstein import (Disc, bernstein_index, check_zero_bound, count_zeros_disc, count_zeros_perturbed,
                                  directional_bernstein, gap_conversion_check, low_value_disc, min_on_circle, restrict,
                                  subadditivity_check)
from noetherian.dsl import compile_program
from noetherian.errors import PreconditionError

UNIT = Disc(0j, 1.0)
LN2 = math.log(2)


def test_index_examples():
    assert bernstein_index(lambda z: 3 + 0 * z, UNIT).index == 0
    assert bernstein_index(lambda z: z, UNIT).index == pytest.approx(LN2, abs=1e-12)
    assert bernstein_index(np.exp, UNIT).index == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("k", range(1, 9))
def test_monomial_index_exact(k):
    assert abs(bernstein_index(lambda z: z ** k, UNIT).index - k * LN2) < 1e-10


def test_index_of_zero_function_is_undefined():
    with pytest.raises(PreconditionError):
        bernstein_index(lambda z: 0 * z, UNIT)


def test_inner_disc_must_fit():
    with pytest.raises(PreconditionError):
        bernstein_index(np.exp, UNIT, K=Disc(0.8, 0.5))


def test_index_of_noetherian_function():
    f = compile_program("let s = sin(x) on domain(x: 0, 1)\n")["s"].function
    got = bernstein_index(f, Disc(0j, 0.9)).index
    want = math.log(abs(math.sinh(0.9)) / abs(math.sinh(0.45)))  # max of |sin| on |z|=r is sinh(r)
    assert got == pytest.approx(want, abs=1e-10)


def test_zero_counts():
    for k in range(5):
        assert count_zeros_disc(lambda z, k=k: z ** k, Disc(0j, 0.7)) == k
    assert count_zeros_disc(np.exp, UNIT) == 0
    f = compile_program("let s = sin(x) on domain(x: 0, 12)\n")["s"].function
    assert count_zeros_disc(f, Disc(0j, 10.0)) == 7


def test_boundary_zero_is_refused_then_perturbed():
    f = lambda z: z - 0.5
    with pytest.raises(PreconditionError):
        count_zeros_disc(f, Disc(0j, 0.5))
    n, r = count_zeros_perturbed(f, Disc(0j, 0.5))
    assert n == 1 and r > 0.5


def test_zero_bound_for_monomials():
    for k in range(1, 7):
        rep = check_zero_bound(lambda z, k=k: z ** k, UNIT, 1.0)
        assert rep["holds"] and rep["zeros"] == k
        assert rep["bound"] == pytest.approx(3 * k * LN2)


def test_zero_bound_constant():
    rep = check_zero_bound(lambda z: 2 + 0 * z, UNIT, 0.5)
    assert rep["holds"] and rep["zeros"] == 0


def test_low_value_disc_examples():
    D, m, rep = low_value_disc(lambda z: z, UNIT)
    assert D.radius == pytest.approx(0.5) and m == pytest.approx(0.5)
    D, m, rep = low_value_disc(np.exp, UNIT)
    assert rep["holds"] and m == pytest.approx(math.exp(-D.radius), rel=1e-9)
    assert min_on_circle(np.exp, 0.5)[0] == pytest.approx(math.exp(-0.5), rel=1e-9)
    D, m, rep = low_value_disc(lambda z: z - 0.3, UNIT)
    assert m > 0 and abs(D.radius - 0.3) > 0.01 and rep["holds"]


def test_gap_conversion():
    ratios = []
    for k in (1, 2, 5):
        rep = gap_conversion_check(lambda z, k=k: z ** k, UNIT, 0.5)
        assert rep["holds"]
        ratios.append(rep["lhs"] / rep["rhs"])
    assert max(ratios) - min(ratios) < 1e-9
    rep = gap_conversion_check(lambda z: 1 + 0 * z, UNIT, 0.5)
    assert rep["holds"] and rep["lhs"] == 0
    assert gap_conversion_check(np.exp, UNIT, 0.5)["holds"]


def test_subadditivity_examples(rng):
    rep = subadditivity_check([lambda z: z ** 2, lambda z: z ** 3], UNIT)
    assert rep["lhs"] == pytest.approx(5 * LN2) and rep["sum"] == pytest.approx(5 * LN2)
    assert subadditivity_check([lambda z: z - 0.5, lambda z: z + 0.5], UNIT)["holds"]
    roots = rng.uniform(-1, 1, 10) + 1j * rng.uniform(-1, 1, 10)
    rep = subadditivity_check([lambda z, a=a: z - a for a in roots], UNIT)
    assert rep["holds"] and rep["factor"] == pytest.approx(2 * math.log(11))


def test_directional_examples():
    zw = lambda p: p[..., 0] * p[..., 1]
    assert directional_bernstein(zw, [0, 0], 1.0).index == pytest.approx(2 * LN2, abs=1e-10)
    assert directional_bernstein(lambda p: p[..., 0], [0, 0], 1.0).index == pytest.approx(LN2, abs=1e-10)
    assert directional_bernstein(lambda p: 1 + 0 * p[..., 0], [0, 0], 1.0).index == 0


def test_restriction_to_a_line():
    g = restrict(lambda p: p[..., 0] + 2 * p[..., 1], Disc(0j, 1.0, (np.array([1, 0j]), np.array([0, 1j]))))
    assert g(np.array([0.5])) == pytest.approx(1 + 1j)


coeffs = st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=2, max_size=11)


@given(coeffs, st.sampled_from([0.5, 1.0]))
def test_zero_bound_random_polynomials(c, eps):
    if abs(c[0]) < 1e-3 or max(abs(x) for x in c) < 1e-3:
        return
    f = lambda z: np.polyval(c, z)
    try:
        rep = check_zero_bound(f, UNIT, eps)
    except PreconditionError:
        return
    assert rep["holds"]


@given(st.integers(0, 6), st.integers(0, 6))
def test_monomial_subadditivity_is_equality(a, b):
    if a + b == 0:
        return
    rep = subadditivity_check([lambda z: z ** a + 0 * z, lambda z: z ** b + 0 * z], UNIT)
    assert rep["lhs"] == pytest.approx(rep["sum"], abs=1e-10)
