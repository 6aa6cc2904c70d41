"""Quick property checks over every module, used by ``noether check``.

Each check returns ``(ok, detail)``; ``run_checks`` collects them into
JSON-ready rows.  The whole suite takes a few seconds.
"""

import math
from fractions import Fraction

import numpy as np

from .config import DEFAULT


def check_bookkeeping(config):
    from .dsl import compile_program, replay

    prog = ("let f = exp(x)*sin(x) + x^2 on domain(x: 0, 1)\n"
            "let g = 1/(2 + cos(x)) on domain(x: 0, 1)\n"
            "let h = diff(f, x) * g on domain(x: 0, 1)\n")
    bad = []
    for name, rep in compile_program(prog, config=config).items():
        again = replay(rep.log)
        bad += [(name, e["id"]) for e in rep.log if tuple(e["params"]) != again[e["id"]]]
    return not bad, {"mismatches": bad}


def check_semantics(config):
    from .dsl import compile_program
    from .evaluate import Evaluator

    f = compile_program("let f = exp(x)*sin(x) - x^3 on domain(x: 0, 1)\n", config=config)["f"].function
    pts = np.array([[0.3], [0.5 + 0.2j], [-0.4 - 0.3j]])
    got = Evaluator(f.chain, config).function_values(f, pts)
    want = np.exp(pts[:, 0]) * np.sin(pts[:, 0]) - pts[:, 0] ** 3
    err = float(np.max(np.abs(got - want)))
    return err < 1e-10, {"max_error": err}


def check_bernstein_monomial(config):
    from .bernstein import Disc, bernstein_index

    errs = [abs(bernstein_index(lambda z, k=k: z ** k, Disc(0j, 1.0), gap=2.0, config=config).index
                - k * math.log(2)) for k in range(1, 6)]
    return max(errs) < 1e-10, {"max_error": max(errs)}


def check_zero_bound(config):
    from .bernstein import Disc, check_zero_bound

    rng = np.random.default_rng(config.seed)
    fails = []
    for trial in range(10):
        c = rng.normal(size=8) + 1j * rng.normal(size=8)
        for eps in (0.5, 1.0):
            rep = check_zero_bound(lambda z, c=c: np.polyval(c, z), Disc(0j, 1.0), eps, config=config)
            if not rep["holds"]:
                fails.append((trial, eps))
    return not fails, {"violations": fails}


def check_resultant(config):
    from .poly import Polynomial
    from .weierstrass import WeierstrassPolydisc, algebraic_variety, analytic_resultant

    W = algebraic_variety([Polynomial.parse("w^2 - z")], ("z", "w"))
    P = WeierstrassPolydisc([0, 0], np.eye(2), [0], [0.25], [0], [1.0])
    errs = []
    for z, c in [(0.1, 0.3), (0.2j, -0.5), (-0.15 + 0.1j, 0.2 + 0.4j)]:
        F = Polynomial.parse(f"w - ({c.real!r}) - ({complex(c).imag!r})*i")
        errs.append(abs(analytic_resultant(W, P, F, [z], ("z", "w")) - (c ** 2 - z)))
    return max(errs) < 1e-10, {"max_error": max(errs)}


def check_polydisc_degree(config):
    from .poly import Polynomial
    from .weierstrass import WeierstrassPolydisc, algebraic_variety, degree, verify_polydisc

    out = {}
    for k in (2, 3):
        W = algebraic_variety([Polynomial.parse(f"w^{k} - z")], ("z", "w"))
        P = WeierstrassPolydisc([0, 0], np.eye(2), [0], [0.1], [0], [1.0])
        out[k] = (bool(verify_polydisc(W, P)["ok"]), degree(W, P)["degree"])
    return all(ok and d == k for k, (ok, d) in out.items()), out


def check_annihilator(config):
    from .curve_ode import annihilator, slope
    from .poly import Polynomial

    L = annihilator(Polynomial.parse("y^2 - t"))
    return slope(L) == Fraction(1, 2), {"operator": L.to_text(), "slope": str(slope(L))}


def check_ideal_chain(config):
    from .ideal_chain import DerivationField, stabilize

    ks = {}
    for comp, P, k in [("x", "x", 0), ("1", "x^2", 2)]:
        ks[P] = stabilize(DerivationField([comp], ["x"]), P).k
    return ks == {"x": 0, "x^2": 2}, ks


def check_census(config):
    from .census import farey_count, points_on_set
    from .poly import Polynomial
    from .weierstrass import algebraic_variety

    X = algebraic_variety([Polynomial.parse("x^2 + y^2 - 1")], ("x", "y"))
    pts = points_on_set(X, [(-1, 1), (-1, 1)], 5, config=config).points
    return len(pts) == 12 and farey_count(5) == 11, {"circle_points": len(pts), "farey_5": farey_count(5)}


CHECKS = {
    "bookkeeping": check_bookkeeping,
    "semantics": check_semantics,
    "bernstein_monomial": check_bernstein_monomial,
    "zero_bound": check_zero_bound,
    "resultant": check_resultant,
    "polydisc_degree": check_polydisc_degree,
    "annihilator": check_annihilator,
    "ideal_chain": check_ideal_chain,
    "census": check_census,
}


def run_checks(config=None, only=None):
    config = config or DEFAULT
    names = [s for s in only.split(",") if s] if only else list(CHECKS)
    rows = []
    for name in names:
        if name not in CHECKS:
            rows.append({"name": name, "ok": False, "detail": {"error": "unknown check"}})
            continue
        try:
            ok, detail = CHECKS[name](config)
        except Exception as exc:
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        rows.append({"name": name, "ok": bool(ok), "detail": detail})
    return rows
