import math

import numpy as np
import pytest

from noetherian.catalog import (CATALOG, FUNCTIONS, OracleCache, catalog_builtin, halphen_oracle, j_oracle,
                                j_singular_distance, wp_lattice)
from noetherian.chain import NoetherianChain, verify_integrability
from noetherian.errors import PreconditionError
from noetherian.evaluate import Evaluator, circle_path, continue_along

ENTRIES = ["exp", "sin", "pell", "pell_hex", "jfun", "halphen", "zetasys"]


@pytest.mark.parametrize("name", [n for n in ENTRIES if n != "zetasys"])
def test_entries_are_integrable(name):
    chain, _ = CATALOG[name].build()
    assert verify_integrability(chain)["status"] == "consistent"


def test_zetasys_defects_vanish_on_the_solution():
    # mixed partials agree only modulo relations that hold on the solution, e.g. y1*y2 = 1
    chain, _ = CATALOG["zetasys"].build()
    rep = verify_integrability(chain, sample_points=6)
    assert rep["status"] == "consistent_on_solution"
    assert rep["max_residual"] < 1e-8


@pytest.mark.parametrize("name", [n for n in ENTRIES if n != "zetasys"])
def test_small_loop_returns_home(name):
    chain, _ = CATALOG[name].build()
    c, r = chain.basepoint[0], 0.5 * chain.domain.radii[0]
    st = continue_along(chain, circle_path(c, r, 24) + [c])
    init = np.array(chain.initial_values)
    assert np.max(np.abs(st.values - init) / np.maximum(1, np.abs(init))) < 1e-8


def test_zetasys_loop_returns_home():
    chain, _ = CATALOG["zetasys"].build()
    z0, t0 = chain.basepoint
    loop = [[z0 + 0.08 * np.exp(2j * np.pi * k / 12), t0 + 0.05 * np.exp(2j * np.pi * k / 12)] for k in range(13)]
    st = continue_along(chain, loop + [[z0, t0]])
    init = np.array(chain.initial_values)
    assert np.max(np.abs(st.values - init) / np.maximum(1, np.abs(init))) < 1e-8


def test_exp_entry_reaches_e(exp_chain):
    assert continue_along(exp_chain, [[1]]).values[0] == pytest.approx(math.e, abs=1e-13)


def test_pell_matches_lattice_sum():
    chain, exports = CATALOG["pell"].build()
    f = chain.function(exports["pell"])
    pts = 0.5 + 0.3 * np.exp(2j * np.pi * np.arange(6) / 6)
    got = Evaluator(chain).function_values(f, pts[:, None])
    want = np.array([wp_lattice(z)[0] for z in pts])
    assert np.max(np.abs(got - want)) < 1e-8


def test_pell_satisfies_kdv_relation():
    chain, _ = CATALOG["pell"].build()
    st = continue_along(chain, [[0.6 + 0.1j]])
    p, p1, p2 = st.values
    assert p2 == pytest.approx(wp_lattice(0.6 + 0.1j)[2], rel=1e-8)


def test_jfun_initial_data():
    chain, _ = CATALOG["jfun"].build()
    j, j1, j2 = j_oracle(2j)
    assert chain.initial_values[:3] == pytest.approx((j, j1, j2))
    assert chain.initial_values[3] == pytest.approx(1 / (2 * j1))


def test_jfun_moves_along_the_line():
    chain, _ = CATALOG["jfun"].build()
    st = continue_along(chain, [[1.7j]])
    assert st.values[0] == pytest.approx(j_oracle(1.7j)[0], rel=1e-9)


def test_jfun_refuses_elliptic_points():
    with pytest.raises(PreconditionError) as err:
        CATALOG["jfun"].build(basepoint=(1.05j,), radius=0.1)
    assert err.value.witness["distance"] == pytest.approx(0.05, abs=1e-9)
    assert j_singular_distance(complex(-0.5, math.sqrt(3) / 2) + 1)[0] < 1e-12


def test_pell_refuses_poles():
    with pytest.raises(PreconditionError):
        CATALOG["pell"].build(basepoint=(0.2,), radius=0.3)


def test_halphen_matches_theta_oracle():
    chain, exports = CATALOG["halphen"].build()
    st = continue_along(chain, [[1j + 0.2]])
    assert np.max(np.abs(st.values[1:] - np.array(halphen_oracle(1j + 0.2)))) < 1e-9


def test_halphen_cyclic_symmetry():
    chain, _ = CATALOG["halphen"].build()
    pi, p2, p3, p4 = chain.initial_values
    rolled = NoetherianChain(chain.xvars, chain.rhs, chain.domain, chain.basepoint, (pi, p3, p4, p2))
    target = [[1j + 0.15 - 0.1j]]
    a = continue_along(chain, target).values
    b = continue_along(rolled, target).values
    assert np.max(np.abs(b[1:] - a[[2, 3, 1]])) < 1e-10


def test_function_names_resolve():
    for name in FUNCTIONS:
        assert name in catalog_builtin(name).exports
    with pytest.raises(KeyError):
        catalog_builtin("gamma")


def test_oracle_cache_round_trip(tmp_path):
    path = tmp_path / "cache.json"
    calls = []

    def compute(bp):
        calls.append(bp)
        return j_oracle(bp[0])

    a = OracleCache(str(path)).get("jfun", (2j,), 53, compute)
    b = OracleCache(str(path)).get("jfun", (2j,), 53, compute)
    assert a == b and len(calls) == 1
