import math

import numpy as np
import pytest

from noetherian.dsl import compile_program
from noetherian.errors import PreconditionError
from noetherian.poly import Polynomial
from noetherian.weierstrass import (AnalyticSet, WeierstrassPolydisc, algebraic_polydisc, algebraic_variety,
                                    analytic_resultant, degree, hypersurface_polydisc, intersect_polydisc,
                                    resultant_function, verify_polydisc)

P = Polynomial.parse
ZW = ("z", "w")


def var(text):
    return algebraic_variety([P(text)], ZW)


def box(zc, zr, wc, wr):
    return WeierstrassPolydisc([0, 0], np.eye(2), [zc], [zr], [wc], [wr])


def well_formed(X, D, base_samples=17):
    check = verify_polydisc(X, D)
    deg = degree(X, D)
    return check["ok"] and check["margin"] > 0 and deg["constant"] and deg["samples"] >= base_samples


def test_verify_examples():
    assert verify_polydisc(var("w^2 - z"), box(0, 0.5, 0, 2))["ok"]
    bad = verify_polydisc(var("w - z"), box(0, 1, 0, 0.5))
    assert not bad["ok"]
    z, w = bad["witness"]
    assert abs(z - w) < 1e-12 and abs(abs(w) - 0.5) < 1e-12
    assert verify_polydisc(var("w^2 - z"), box(1, 0.1, 1, 0.5))["ok"]


def test_degree_examples():
    assert degree(var("w^2 - z"), box(0, 0.5, 0, 2))["degree"] == 2
    assert degree(var("w^2 - z"), box(1, 0.1, 1, 0.5))["degree"] == 1
    assert degree(var("w - z^3 + 2*z"), box(0, 0.5, 0, 2))["degree"] == 1


@pytest.mark.parametrize("k", range(1, 7))
def test_degree_of_power_covers(k):
    X = var(f"w^{k} - z")
    D = box(0, 0.5, 0, 1.5)
    assert well_formed(X, D) and degree(X, D)["degree"] == k


def test_degree_by_winding_for_noetherian_sets():
    f = compile_program("let g = exp(w) - 1 - z on domain(z: 0, 1; w: 0, 1)\n")["g"].function
    X = AnalyticSet([f])
    D = box(0, 0.2, 0, 0.6)
    assert well_formed(X, D) and degree(X, D)["degree"] == 1


def test_hypersurface_polydisc_examples():
    D = hypersurface_polydisc(var("w"), [0, 0.5], 1.0)
    assert D.degree == 0 and verify_polydisc(var("w"), D)["ok"]
    X = var("w^2 - z")
    D = hypersurface_polydisc(X, [0.5, 0.8], 0.5)
    assert D.degree == 1 and well_formed(X, D)
    f = compile_program("let g = exp(z) - w on domain(z: 0, 2; w: 1, 2)\n")["g"].function
    D = hypersurface_polydisc(f, [0, 1], 1.0)
    assert D.degree == 1 and well_formed(AnalyticSet([f]), D)


def test_fiber_radius_comes_from_low_value_disc():
    D = hypersurface_polydisc(var("w^2 - z"), [0.5, 0.8], 0.5)
    assert 0.5 / 4 - 1e-12 <= D.fiber_radii[0] <= 0.5 / 2 + 1e-12
    assert D.outer_radius() <= 0.5


def test_resultant_closed_form(rng):
    W = var("w^2 - z")
    D = box(0, 0.25, 0, 1)
    for _ in range(10):
        z = 0.2 * rng.random() * np.exp(2j * np.pi * rng.random())
        c = rng.normal() + 1j * rng.normal()
        F = P(f"w - ({c.real!r}) - ({c.imag!r})*i")
        assert abs(analytic_resultant(W, D, F, [z], ZW) - (c * c - z)) < 1e-10


def test_resultant_trivial_cases():
    W = var("w^2 - z")
    D = box(0, 0.25, 0, 1)
    assert analytic_resultant(W, D, P("1 + 0*w"), [0.1], ZW) == 1
    G = var("w - z")
    F = P("z^2 + 3*w - 1")
    R = resultant_function(G, box(0, 0.5, 0, 1), F, ZW)
    zs = np.array([[0.1], [0.2j], [-0.3]])
    assert np.allclose(R(zs), zs[:, 0] ** 2 + 3 * zs[:, 0] - 1, atol=1e-13)


def test_intersection_with_a_line():
    W = var("w^2 - z")
    D = box(1 / 16, 0.05, 0.25, 0.2)
    out = intersect_polydisc(W, D, P("w - 1/4"), [1 / 16], 0.04, ZW)
    assert out.degree == 1 and out.m == 0
    X_F = AnalyticSet(W.functions + [P("w - 1/4").with_variables(ZW)], ZW)
    assert verify_polydisc(X_F, out)["ok"]


def test_intersection_of_graph():
    W = var("w - z")
    D = box(0, 0.5, 0, 1)
    out = intersect_polydisc(W, D, P("z - 1/5"), [0.2], 0.2, ZW)
    assert out.degree == 1
    assert abs(out.origin[0] - 0.2) < 0.2


def test_intersection_with_exponential():
    W = var("w^2 - z")
    z0 = math.log(2) ** 2
    f = compile_program("let g = exp(w) - 2 on domain(z: 0, 2; w: 0, 2)\n")["g"].function
    D = box(z0, 0.15, math.log(2), 0.3)
    assert verify_polydisc(W, D)["ok"] and degree(W, D)["degree"] == 1
    out = intersect_polydisc(W, D, f, [z0], 0.1)
    assert out.degree == 1


def test_intersection_refuses_vanishing_F():
    W = var("w - z")
    with pytest.raises(PreconditionError):
        intersect_polydisc(W, box(0, 0.5, 0, 1), P("w - z"), [0], 0.2, ZW)


def test_algebraic_polydisc_examples():
    X = var("w^2 - z")
    D = algebraic_polydisc(X, [0.5, 0.8], 1.0)
    assert well_formed(X, D) and D.outer_radius() <= 1.0
    line = var("w")
    D = algebraic_polydisc(line, [0, 0], 1.0)
    assert D.degree == 1 and np.allclose(D.frame, np.eye(2))
    hyp = var("z*w - 1")
    D = algebraic_polydisc(hyp, [1, 1], 0.5)
    assert D.degree == 1 and well_formed(hyp, D)


def test_algebraic_polydisc_refuses_noetherian_input():
    f = compile_program("let g = exp(z) - w on domain(z: 0, 2; w: 1, 2)\n")["g"].function
    with pytest.raises(PreconditionError):
        algebraic_polydisc(f, [0, 1], 1.0)


def test_polydisc_geometry():
    D = box(0, 0.3, 0, 0.4)
    assert D.contains_ball() == pytest.approx(0.3)
    assert D.outer_radius() == pytest.approx(0.5)
    assert D.base_samples().shape == (17, 1)
    with pytest.raises(ValueError):
        WeierstrassPolydisc([0, 0], np.ones((2, 2)), [0], [1], [0], [1])
