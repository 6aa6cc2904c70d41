import math

import numpy as np
import pytest

from noetherian.catalog import CATALOG
from noetherian.chain import NoetherianChain, NoetherianFunction, noetherian_size, verify_integrability
from noetherian.closure import extend_domain, union
from noetherian.errors import PreconditionError
from noetherian.poly import ComplexBox, Polynomial

P = Polynomial.parse


def const_chain():
    return NoetherianChain(("x",), [[P("0")]], ComplexBox([0], [1]), (0,), (1,))


def test_exp_chain_is_integrable(exp_chain):
    assert verify_integrability(exp_chain)["status"] == "consistent"


def test_mixed_partials_disagree():
    c = NoetherianChain(("x1", "x2"), [[P("y1"), P("1")]], ComplexBox([0, 0], [1, 1]), (0, 0), (1,))
    rep = verify_integrability(c)
    assert rep["status"] == "inconsistent"
    assert rep["violation"]["coords"] == (0, 1)


def test_j_system_is_vacuously_integrable():
    chain, _ = CATALOG["jfun"].build()
    assert chain.n == 1
    assert verify_integrability(chain)["status"] == "consistent"


def test_size_of_exp_on_unit_disc(exp_chain):
    assert noetherian_size(exp_chain)["NS"] == pytest.approx(math.e, rel=1e-12)


def test_size_is_clamped_at_two(sincos_chain):
    assert noetherian_size(const_chain())["NS"] == 2.0
    # max |cos| on the unit circle is cosh(1) < 2
    raw = noetherian_size(sincos_chain)
    assert raw["raw"] == pytest.approx(math.cosh(1), rel=1e-6)
    assert raw["NS"] == 2.0


def test_size_estimate_monotone_in_grid_level(exp_chain):
    # nested grids: refining never loses a sample point, only round-off differs
    assert noetherian_size(exp_chain, level=1)["raw"] <= noetherian_size(exp_chain, level=2)["raw"] * (1 + 1e-12)


def test_member_names_cannot_be_coordinates():
    with pytest.raises(ValueError):
        NoetherianChain(("y1",), [], ComplexBox([0], [1]), (0,), ())


def test_function_degree_defaults_to_polynomial_degree(exp_chain):
    f = NoetherianFunction(exp_chain, P("y1^2 + x"))
    assert f.params == (1, 1, 1, 2)
    assert f.value_at_basepoint() == 1


def test_serialization_round_trip(sincos_chain):
    again = NoetherianChain.from_json(sincos_chain.to_json())
    assert again.same_as(sincos_chain)


def test_union_with_empty_chain_keeps_params(exp_chain):
    empty = NoetherianChain(("x",), [], exp_chain.domain, exp_chain.basepoint, ())
    chain, _, _ = union(exp_chain, empty)
    assert chain.params == exp_chain.params


def test_union_needs_a_common_frame(exp_chain):
    other, _ = CATALOG["exp"].build(radius=0.5)
    with pytest.raises(PreconditionError):
        union(exp_chain, other)


def test_extend_exp_domain(exp_chain):
    bigger, rep = extend_domain(exp_chain)
    assert rep["rho"] == pytest.approx(math.e ** -3, rel=1e-9)
    assert bigger.domain.radii[0] == pytest.approx(1 + math.e ** -3)
    assert rep["NS_extended"] <= 2 * rep["NS"]


def test_extend_constant_and_trig_chains(sincos_chain):
    _, rep = extend_domain(const_chain())
    assert rep["NS_extended"] == 2.0
    _, rep = extend_domain(sincos_chain)
    assert rep["NS_extended"] <= 2 * rep["NS"]
