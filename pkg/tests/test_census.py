import math
from fractions import Fraction as Fr

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from noetherian.census import (algebraic_census, algebraic_numbers, census_report, enumerate_rationals, explore,
                               farey_count, fit_hypersurface, growth_slope, height, lift_variety, mahler_height,
                               minimal_polynomial, points_on_set, poly_height, rows_to_csv)
from noetherian.dsl import compile_program
from noetherian.errors import PreconditionError
from noetherian.poly import Polynomial
from noetherian.weierstrass import algebraic_variety

UNIT = [(Fr(-1), Fr(1)), (Fr(-1), Fr(1))]


def variety(*texts, variables=("x", "y")):
    return algebraic_variety([Polynomial.parse(t) for t in texts], variables)


@pytest.fixture(scope="module")
def sin_graph():
    return compile_program("let g = y - sin(x) on domain(x: 0, 2; y: 0, 2)\n")["g"].function


@pytest.fixture(scope="module")
def exp_graph():
    return compile_program("let g = y - exp(x) on domain(x: 1/2, 1; y: 3/2, 2)\n")["g"].function


def test_height_examples():
    assert height(Fr(1, 2)) == 2
    assert height(Fr(0)) == 1
    assert height((Fr(3, 7), Fr(2))) == 7
    assert height(Fr(-5, 3)) == 5


def test_enumeration_examples():
    assert len(list(enumerate_rationals([(0, 1)], 5))) == 11
    assert [tuple(p) for p in enumerate_rationals([(0, 1)], 1)] == [(Fr(0),), (Fr(1),)]
    grid = list(enumerate_rationals([(0, 1), (0, 1)], 2))
    assert len(grid) == 9 and len(set(map(tuple, grid))) == 9


def test_enumeration_matches_totient_sum():
    for H in (1, 2, 7, 50, 200, 1000):
        assert farey_count(H) == 1 + sum(sp.totient(q) for q in range(1, H + 1))
    for H in (1, 13, 60):
        pts = list(enumerate_rationals([(0, 1)], H))
        assert len(pts) == farey_count(H) == len(set(map(tuple, pts)))


@settings(max_examples=30)
@given(st.integers(-6, 6), st.integers(1, 6), st.integers(1, 12))
def test_enumeration_is_exact_and_complete(a, w, H):
    lo, hi = Fr(a, 2), Fr(a, 2) + Fr(w, 3)
    got = [p[0] for p in enumerate_rationals([(lo, hi)], H)]
    brute = sorted({Fr(p, q) for q in range(1, H + 1) for p in range(-H, H + 1)
                    if lo <= Fr(p, q) <= hi and height(Fr(p, q)) <= H})
    assert sorted(got) == brute and len(got) == len(set(got))


def test_poly_height_examples():
    assert poly_height(sp.sqrt(2), 2) == (2, [-2, 0, 1])
    assert poly_height(3, 1) == (3, [-3, 1])
    assert poly_height(sp.sqrt(2), 1)[0] == math.inf
    m, _ = minimal_polynomial(sp.sqrt(2))
    H = mahler_height(m)
    assert H == pytest.approx(math.sqrt(2))
    assert 2 <= 2 ** 2 * H ** 2


def test_points_on_sin_graph(sin_graph):
    pts = points_on_set(sin_graph, UNIT, 64).points
    assert [p.coordinates for p in pts] == [(Fr(0), Fr(0))]


def test_points_on_circle():
    pts = points_on_set(variety("x^2 + y^2 - 1"), UNIT, 5).points
    coords = {p.coordinates for p in pts}
    assert len(coords) == 12 and (Fr(3, 5), Fr(4, 5)) in coords and (Fr(0), Fr(1)) in coords
    assert all(p.exact for p in pts)


def test_points_on_empty_set():
    assert points_on_set(variety("1 + 0*x"), UNIT, 8).points == []


def test_fit_examples():
    circle = [p.coordinates for p in points_on_set(variety("x^2 + y^2 - 1"), UNIT, 5).points]
    fit = fit_hypersurface(circle, 2, variables=("x", "y"))
    circ = Polynomial.parse("x^2 + y^2 - 1").with_variables(("x", "y"))
    assert fit.polynomial in (circ, -circ)
    line = fit_hypersurface([(Fr(0), Fr(1)), (Fr(2), Fr(3))], 1, variables=("x", "y")).polynomial
    assert line.eval_exact((Fr(1), Fr(2))) == 0 and line.degree() == 1
    rng = np.random.default_rng(3)
    generic = [tuple(Fr(int(v), 7) for v in rng.integers(-20, 20, size=2)) for _ in range(6)]
    with pytest.raises(PreconditionError):
        fit_hypersurface(generic, 1)


def test_fit_avoids_the_ambient_variety():
    circle = [p.coordinates for p in points_on_set(variety("x^2 + y^2 - 1"), UNIT, 5).points][:3]
    W = [Polynomial.parse("x^2 + y^2 - 1").with_variables(("x", "y"))]
    fit = fit_hypersurface(circle, 2, W=W, variables=("x", "y"))
    assert all(fit.polynomial.eval_exact(p) == 0 for p in circle)
    w = np.array(fit.witness, dtype=complex)
    assert abs(w[0] ** 2 + w[1] ** 2 - 1) < 1e-9
    assert abs(fit.polynomial.numeric(("x", "y"))(w)) > 1e-8


def test_explore_examples(exp_graph):
    tree = explore(variety("x^2 + y^2 - 1"), box=UNIT, H=5)
    assert len(tree.nodes) == 1 and tree.root.kind == "certificate"
    tree = explore(exp_graph, box=[(Fr(0), Fr(1)), (Fr(0), Fr(3))], H=32, eps=0.5)
    assert tree.leaf_points() == [(Fr(0), Fr(1))]
    assert tree.isolated_points() == [(Fr(0), Fr(1))]
    tree = explore(variety("1 + 0*x"), box=UNIT, H=5)
    assert tree.leaf_points() == [] and tree.root.kind == "empty"


def test_explore_is_sound_on_lines():
    X = variety("x*y - y")   # two lines x=1 and y=0
    census = points_on_set(X, UNIT, 6)
    tree = explore(X, box=UNIT, H=6, census=census)
    assert tree.covers([p.coordinates for p in census.points])


def test_lift_recovers_square_roots():
    L = lift_variety(variety("x^2 - 2", variables=("x",)), 2)
    got = algebraic_census(L, [(-2, 2)], 4)
    assert sorted(p.coordinates[0] for p in got) == pytest.approx([-math.sqrt(2), math.sqrt(2)])
    assert all(p.height == 2 and p.minpolys == ((-2, 0, 1),) for p in got)
    assert algebraic_census(lift_variety(variety("x^2 - 2", variables=("x",)), 1), [(-2, 2)], 4) == []


def test_lift_with_k1_is_the_rational_census():
    X = variety("x^2 + y^2 - 1")
    got = {tuple(Fr(v).limit_denominator(100) for v in p.coordinates)
           for p in algebraic_census(lift_variety(X, 1), UNIT, 5)}
    want = {p.coordinates for p in points_on_set(X, UNIT, 5).points}
    assert got == want


def test_lift_matches_direct_search():
    # for an algebraic X, the lift equals a direct scan of algebraic numbers
    X = variety("x^2 - 3", variables=("x",))
    lifted = algebraic_census(lift_variety(X, 2), [(-2, 2)], 3)
    direct = [a for a in algebraic_numbers(-2, 2, 2, 3) if abs(a.value ** 2 - 3) < 1e-12]
    assert sorted(p.coordinates[0] for p in lifted) == pytest.approx(sorted(a.value for a in direct))


def test_exp_graph_has_no_quadratic_points(exp_graph):
    got = algebraic_census(lift_variety(exp_graph, 2), [(Fr(0), Fr(1)), (Fr(1), Fr(3))], 2)
    assert [p.coordinates for p in got] == [(0.0, 1.0)]


def test_census_report_examples(sin_graph):
    rep = census_report(sin_graph, UNIT, [1, 2, 4, 8, 16])
    assert rep["counts"] == [1] * 5 and rep["slope"] == 0 and not rep["super_eps"]
    assert all(r["certificate_kind"] == "isolated" for r in rep["rows"])
    line = census_report(variety("y - x"), UNIT, [2, 4, 8])
    assert line["counts"][0] < line["counts"][-1]
    assert line["isolated_counts"] == [0, 0, 0] and line["notes"]
    csv = rows_to_csv(rep["rows"]).splitlines()
    assert csv[0] == "H,count,leaf_id,certificate_kind" and len(csv) == 6


def test_growth_slope():
    assert growth_slope([2, 4, 8], [1, 1, 1]) == 0
    assert growth_slope([2, 4, 8], [4, 16, 64]) == pytest.approx(2)
