"""Linear ODEs for algebraic functions and Noetherian functions restricted to curves.

Annihilators are computed exactly in the quotient ring Q(t)[y]/(P);
the restriction of a chain to a curve is assembled as a polynomial
field over C_t times the roster of derivative, reciprocal and chain
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp
from sympy.polys.matrices import DomainMatrix

from .bernstein import Disc, bernstein_index, check_zero_bound, count_zeros_perturbed, subadditivity_factor
from .chain import NoetherianFunction, noetherian_size
from .config import DEFAULT
from .errors import PreconditionError
from .evaluate import Evaluator
from .poly import Polynomial, make_coeff, re_im
from .weierstrass import AnalyticSet, algebraic_polydisc, analytic_resultant

T, Y = sp.symbols("t y")
QT = sp.QQ.frac_field(T)
_TG = QT.field.gens[0]


# ---------------------------------------------------------------- conversions

def to_sympy(p, symbols=None):
    """Exact sympy expression for a Polynomial (Gaussian rational coefficients)."""
    symbols = symbols or {v: sp.Symbol(v) for v in p.variables}
    out = sp.Integer(0)
    for e, c in p.items():
        re, im = re_im(c)
        term = sp.Rational(re.numerator, re.denominator) + sp.I * sp.Rational(im.numerator, im.denominator)
        for v, k in zip(p.variables, e):
            if k:
                term *= symbols[v] ** k
        out += term
    return sp.expand(out)


def from_sympy(expr, names):
    """Polynomial in ``names`` (strings) from a sympy expression or Poly."""
    syms = [sp.Symbol(n) for n in names]
    poly = expr if isinstance(expr, sp.Poly) else sp.Poly(sp.expand(expr), *syms)
    if tuple(str(g) for g in poly.gens) != tuple(names):
        poly = sp.Poly(poly.as_expr(), *syms)
    terms = {}
    for mon, c in poly.terms():
        re, im = sp.re(c), sp.im(c)
        terms[tuple(mon)] = make_coeff(Fraction(int(sp.numer(re)), int(sp.denom(re))),
                                       Fraction(int(sp.numer(im)), int(sp.denom(im))))
    return Polynomial(terms, tuple(names))


def _sup_norm(poly_t):
    """Largest absolute coefficient (exact rational) of a sympy Poly."""
    return max((abs(sp.Rational(c)) for c in poly_t.coeffs()), default=sp.Integer(0))


# ---------------------------------------------------------------- quotient ring

class _Quotient:
    """Arithmetic in Q(t)[y]/(P) on coefficient lists (lowest degree first)."""

    def __init__(self, P):
        coeffs = sp.Poly(P, Y, domain=QT).rep.to_list()[::-1]
        self.d = len(coeffs) - 1
        lead = coeffs[-1]
        self.tail = [c / lead for c in coeffs[:-1]]

    def reduce(self, a):
        a = list(a)
        d = self.d
        for k in range(len(a) - 1, d - 1, -1):
            c = a[k]
            if c:
                for i in range(d):
                    a[k - d + i] -= c * self.tail[i]
            a[k] = QT.zero
        return (a + [QT.zero] * d)[:d]

    def mul(self, a, b):
        out = [QT.zero] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, z in enumerate(b):
                    out[i + j] += x * z
        return self.reduce(out)

    def from_poly(self, P):
        return self.reduce(sp.Poly(P, Y, domain=QT).rep.to_list()[::-1])

    def inverse(self, a, P):
        A = sp.Poly(sum(QT.to_sympy(c) * Y ** i for i, c in enumerate(a)), Y, domain=QT)
        try:
            inv = A.invert(sp.Poly(P, Y, domain=QT))
        except (sp.polys.polyerrors.NotInvertible, ZeroDivisionError):
            raise PreconditionError("P_y is not invertible modulo P (P is not squarefree in y)")
        return self.from_poly(inv.as_expr())

    def to_expr(self, a):
        return sp.together(sum(QT.to_sympy(c) * Y ** i for i, c in enumerate(a)))


# ---------------------------------------------------------------- scalar ODEs

@dataclass
class ScalarODE:
    """``L = a_0 d^k + a_1 d^(k-1) + ... + a_k`` with a_i polynomials in t."""

    coefficients: list
    derivative_forms: list = field(default_factory=list, repr=False)
    source: object = None

    @property
    def order(self):
        return len(self.coefficients) - 1

    @property
    def a(self):
        return self.coefficients

    def polynomials(self):
        return [from_sympy(sp.Poly(c, T), ("t",)) for c in self.coefficients]

    def form_functions(self):
        """Numeric ``(y, t) -> y^(k)`` for k below the order."""
        if not hasattr(self, "_forms"):
            if not self.derivative_forms and getattr(self, "_jets", None):
                R, jets = self._jets
                self.derivative_forms = [R.to_expr(v) for v in jets]
            self._forms = [sp.lambdify((Y, T), f, "numpy") for f in self.derivative_forms]
        return self._forms

    def numeric(self):
        fs = [sp.lambdify(T, c.as_expr(), "numpy") for c in self.coefficients]
        return [lambda t, f=f: np.asarray(f(np.asarray(t, dtype=complex)), dtype=complex) * np.ones_like(t, dtype=complex)
                for f in fs]

    def apply(self, derivs):
        """``L`` applied to the jets ``derivs[i] = y^(i)`` as sympy expressions."""
        k = self.order
        return sp.expand(sum(self.coefficients[i].as_expr() * derivs[k - i] for i in range(k + 1)))

    def to_text(self):
        parts = []
        for i, c in enumerate(self.coefficients):
            k = self.order - i
            op = "y" if k == 0 else ("d" if k == 1 else f"d^{k}")
            parts.append(f"({c.as_expr()})*{op}")
        return " + ".join(parts)


def annihilator(P, y=None, t=None):
    """Minimal-order linear ODE over Q[t] satisfied by every root y(t) of ``P``.

    ``P`` is a sympy expression (or Polynomial) in ``y`` and ``t``.  The
    derivatives y', y'', ... are computed modulo P with
    ``y' = -P_t / P_y``; the first linear dependence among them gives the
    operator, with denominators cleared, common factors removed and the
    leading coefficient scaled to sup-norm one.
    """
    if isinstance(P, Polynomial):
        yname, tname = y or "y", t or "t"
        P = to_sympy(P, {yname: Y, tname: T, **{v: sp.Symbol(v) for v in P.variables if v not in (yname, tname)}})
    elif y is not None or t is not None:
        P = P.subs({y or Y: Y, t or T: T}, simultaneous=True)
    P = sp.expand(P)
    if P.free_symbols - {Y, T}:
        raise PreconditionError("P must involve only y and t", {"symbols": sorted(map(str, P.free_symbols))})
    if sp.degree(P, Y) < 1:
        raise PreconditionError("P must have positive degree in y")
    g = sp.gcd(sp.Poly(P, Y, domain=QT), sp.Poly(sp.diff(P, Y), Y, domain=QT))
    if g.degree() > 0:
        raise PreconditionError("P is not squarefree in y", {"gcd": str(g.as_expr())})
    R = _Quotient(P)
    Py = R.from_poly(sp.diff(P, Y))
    Pt = R.from_poly(sp.diff(P, T))
    yprime = R.mul([-c for c in Pt], R.inverse(Py, P))

    def D(e):
        dt = [c.diff(_TG) for c in e]
        dy = [QT.convert(i + 1) * e[i + 1] for i in range(len(e) - 1)] + [QT.zero]
        return [u + v for u, v in zip(dt, R.mul(dy, yprime))]

    derivs = [R.from_poly(Y)]
    while True:
        derivs.append(D(derivs[-1]))
        M = DomainMatrix([[v[i] for v in derivs] for i in range(R.d)], (R.d, len(derivs)), QT)
        null = M.nullspace()
        if null.shape[0]:
            vec = null.to_list()[0]
            break
    k = len(derivs) - 1
    # a_0 multiplies y^(k); clear denominators and common factors in Q[t]
    fracs = vec[::-1]
    den = fracs[0].denom
    for f in fracs[1:]:
        den = den.lcm(f.denom)
    nums = [f.numer * den.exquo(f.denom) for f in fracs]
    common = None
    for q in nums:
        if q:
            common = q if common is None else common.gcd(q)
    nums = [sp.Poly(q.exquo(common).as_expr(), T, domain=sp.QQ) for q in nums]
    lead = nums[0]
    scale = _sup_norm(lead)
    sign = 1 if lead.LC() > 0 else -1
    nums = [sp.Poly(q * sign / scale, T, domain=sp.QQ) for q in nums]
    ode = ScalarODE(nums, source=P)
    ode._jets = (R, derivs[:k])
    # exact check in Q(t)[y]/(P): sum a_i * y^(k-i) reduces to zero
    a = [QT.convert(q.as_expr()) for q in nums]
    residual = [sum((a[i] * derivs[k - i][c] for i in range(k + 1)), QT.zero) for c in range(R.d)]
    if any(residual):
        raise AssertionError(f"annihilator check failed: {[QT.to_sympy(r) for r in residual]}")
    return ode


def slope(L):
    """``max_i ||a_i|| / ||a_0||`` as an exact Fraction."""
    a0 = _sup_norm(L.coefficients[0])
    if a0 == 0:
        raise PreconditionError("leading coefficient vanishes")
    best = max((_sup_norm(c) for c in L.coefficients[1:]), default=sp.Integer(0))
    r = sp.Rational(best / a0)
    return Fraction(int(r.p), int(r.q))


# ---------------------------------------------------------------- curves

class AlgebraicCurve:
    """A curve given by generators with an affine projection ``t = c.x + c0``.

    ``projection`` is a variable name or ``(coeffs, constant)``.  The
    curve is assumed one-dimensional; each coordinate is eliminated to a
    squarefree plane relation ``P_j(x_j, t) = 0``.
    """

    def __init__(self, generators, variables=None, projection=None):
        gens = [g if isinstance(g, Polynomial) else Polynomial.parse(g) for g in generators]
        if variables is None:
            names = set()
            for g in gens:
                names |= set(g.used_variables())
            variables = tuple(sorted(names))
        self.variables = tuple(variables)
        self.generators = [g.with_variables(set(g.variables) | set(self.variables)) for g in gens]
        if projection is None:
            projection = self.variables[0]
        if isinstance(projection, str):
            coeffs = [1 if v == projection else 0 for v in self.variables]
            projection = (coeffs, 0)
        self.projection = ([sp.nsimplify(c) for c in projection[0]], sp.nsimplify(projection[1]))
        self._relations = None

    @property
    def n(self):
        return len(self.variables)

    @property
    def degree(self):
        """Bezout bound on the degree."""
        return int(np.prod([max(g.degree(), 1) for g in self.generators]))

    def _syms(self):
        return [sp.Symbol(f"_c{j}") for j in range(self.n)]

    def projection_expr(self, syms=None):
        syms = syms or self._syms()
        c, c0 = self.projection
        return sum(ci * s for ci, s in zip(c, syms)) + c0

    def relations(self):
        """``{name: P_j(y, t)}`` eliminating every other coordinate."""
        if self._relations is not None:
            return self._relations
        syms = self._syms()
        sub = dict(zip(self.variables, syms))
        G = [to_sympy(g, sub) for g in self.generators]
        out = {}
        for j, name in enumerate(self.variables):
            others = [s for i, s in enumerate(syms) if i != j]
            basis = sp.groebner(G + [T - self.projection_expr(syms)], *others, syms[j], T, order="lex")
            cands = [b for b in basis.exprs if not (b.free_symbols & set(others)) and b.has(syms[j])]
            if not cands:
                raise PreconditionError("coordinate is not algebraic over the projection",
                                        {"coordinate": name})
            best = min(cands, key=lambda b: (sp.degree(b, syms[j]), sp.total_degree(b)))
            P = sp.Poly(best.subs(syms[j], Y), Y, T)
            P = sp.Poly(sp.sqf_part(P.as_expr()), Y, T)
            out[name] = P.as_expr()
        self._relations = out
        return out

    def explicit(self, name):
        """Polynomial p(t) when ``x_name = p(t)`` on the curve, else None."""
        P = self.relations()[name]
        if sp.degree(P, Y) == 1:
            lead = sp.Poly(P, Y).coeff_monomial(Y)
            if not lead.has(T):
                return sp.expand(-(P - lead * Y) / lead)
        return None

    def residuals(self, point):
        point = np.asarray(point, dtype=complex)
        return np.array([g.numeric(self.variables)(point) for g in self.generators])

    def point_at(self, t, guess, steps=30, tol=1e-13):
        """Newton solve of ``generators = 0, projection = t`` from ``guess``."""
        x = np.asarray(guess, dtype=complex).copy()
        c = np.array([complex(v) for v in self.projection[0]])
        c0 = complex(self.projection[1])
        grads = [[g.diff(v).numeric(self.variables) for v in self.variables] for g in self.generators]
        for _ in range(steps):
            F = np.concatenate([self.residuals(x), [c @ x + c0 - t]])
            J = np.array([[float(0) + d(x) for d in row] for row in grads] + [c])
            dx = np.linalg.lstsq(J, -F, rcond=None)[0]
            x = x + dx
            if np.linalg.norm(dx) <= tol * max(1.0, np.linalg.norm(x)):
                break
        return x

    def track(self, t0, x0, t1, steps=16):
        """Follow the branch through ``x0`` over the segment to ``t1``."""
        x = np.asarray(x0, dtype=complex)
        for s in range(1, steps + 1):
            x = self.point_at(t0 + (t1 - t0) * s / steps, x)
        return x


# ---------------------------------------------------------------- restriction

@dataclass
class RestrictionSystem:
    roster: tuple
    rules: list
    annihilators: dict
    explicit: dict
    chain: object
    curve: AlgebraicCurve
    report: dict = field(default_factory=dict)

    @property
    def N(self):
        return len(self.roster)

    @property
    def variables(self):
        return ("t",) + self.roster

    def norm(self):
        return float(max((p.max_norm() for p in self.rules), default=0))

    def field_at(self, t, state):
        pt = np.concatenate([[t], np.asarray(state, dtype=complex)])
        return np.array([p.numeric(self.variables)(pt) for p in self.rules])

    def state(self, t, point, chain_values=None, config=None):
        """The solution through a curve point (derivatives, reciprocals, chain values)."""
        out = []
        t = complex(t)
        for j, name in enumerate(self.curve.variables):
            if name in self.explicit:
                continue
            L = self.annihilators[name]
            out.extend(complex(f(complex(point[j]), t)) for f in L.form_functions())
            out.append(1 / complex(L.numeric()[0](t)))
        if self.chain.ell:
            if chain_values is None:
                chain_values = Evaluator(self.chain, config or DEFAULT).values_at(np.asarray(point, dtype=complex))
            out.extend(complex(v) for v in chain_values)
        return np.array(out, dtype=complex)

    def residual(self, t0, point, h=1e-4, config=None):
        """Central-difference check that the state curve solves the field."""
        ev = Evaluator(self.chain, config or DEFAULT) if self.chain.ell else None
        pts = [self.curve.point_at(t0 + s * h, point) for s in (-2, -1, 1, 2)]
        states = [self.state(t0 + s * h, p, ev.values_at(p) if ev else None)
                  for s, p in zip((-2, -1, 1, 2), pts)]
        deriv = (-states[3] + 8 * states[2] - 8 * states[1] + states[0]) / (12 * h)
        here = self.state(t0, point, ev.values_at(np.asarray(point, dtype=complex)) if ev else None)
        f = self.field_at(t0, here)
        return float(np.max(np.abs(deriv - f)) / max(1.0, float(np.max(np.abs(f)))))


def restriction_system(chain, curve, config=None):
    """Polynomial field for ``t -> (x(t) jets, 1/a_0(t), phi(x(t)))``."""
    if tuple(chain.xvars) != tuple(curve.variables):
        raise PreconditionError("curve and chain must use the same coordinates")
    roster, rules_map = [], {}
    annihilators, explicit = {}, {}
    tpoly = {}
    x0, x1 = {}, {}
    tname = "t"
    as_t = lambda e: from_sympy(sp.Poly(sp.expand(e), T), (tname,)) if sp.expand(e) != 0 else Polynomial.zero((tname,))
    for name in curve.variables:
        p = curve.explicit(name)
        if p is not None:
            explicit[name] = p
            x0[name] = as_t(p)
            x1[name] = as_t(sp.diff(p, T))
            continue
        L = annihilator(curve.relations()[name])
        annihilators[name] = L
        k = L.order
        names = [f"x_{name}_{i}" for i in range(k)]
        q = f"Q_{name}"
        roster.extend(names + [q])
        a = [as_t(c.as_expr()) for c in L.coefficients]
        V = [Polynomial.var(v) for v in names]
        Q = Polynomial.var(q)
        top = Polynomial.zero()
        for i in range(1, k + 1):
            top = top + a[i] * V[k - i]
        top = -(Q * top)
        for i in range(k - 1):
            rules_map[names[i]] = V[i + 1]
        rules_map[names[k - 1]] = top
        rules_map[q] = -(as_t(sp.diff(L.coefficients[0].as_expr(), T)) * Q * Q)
        x0[name] = V[0]
        x1[name] = V[1] if k >= 2 else top
    roster.extend(chain.members)
    tmp = {v: f"__c{j}" for j, v in enumerate(chain.xvars)}
    for i, m in enumerate(chain.members):
        acc = Polynomial.zero()
        for j, v in enumerate(chain.xvars):
            P = chain.rhs[i][j].rename(tmp).subs({tmp[w]: x0[w] for w in chain.xvars})
            acc = acc + P * x1[v]
        rules_map[m] = acc
    variables = (tname,) + tuple(roster)
    rules = [rules_map[r].with_variables(set(rules_map[r].variables) | set(variables)) for r in roster]
    rules = [r.with_variables(variables) for r in rules]
    system = RestrictionSystem(tuple(roster), rules, annihilators, explicit, chain, curve)
    ns = noetherian_size(chain, config=config)["NS"] if chain.ell else 2.0
    norm = system.norm()
    d = curve.degree
    system.report = {"N": system.N, "norm": norm, "NS": ns, "degree": d,
                     "orders": {k: v.order for k, v in annihilators.items()},
                     "slopes": {k: str(slope(v)) for k, v in annihilators.items()},
                     # exponent e with norm/NS = 2^(2^e); the documented shape is e = poly(d)
                     "shape_exponent": math.log2(max(1.0, math.log2(max(norm / ns, 2.0)))),
                     "finite": bool(np.isfinite(norm))}
    return system


# ---------------------------------------------------------------- annulus

def _root_boxes(poly_t, eps=1e-8):
    """Isolating rectangles (exact rationals) for all complex roots."""
    P = sp.Poly(poly_t, T, domain=sp.QQ)
    if P.degree() <= 0:
        return []
    out = []
    for factor, mult in P.sqf_list()[1]:
        real, cplx = factor.intervals(all=True, eps=eps)
        for (a, b), _ in real:
            out.append(((sp.Rational(a), sp.Rational(0)), (sp.Rational(b), sp.Rational(0))))
        for ((x1, y1), (x2, y2)), _ in cplx:
            out.append(((sp.Rational(x1), sp.Rational(y1)), (sp.Rational(x2), sp.Rational(y2))))
    return out


def _modulus_range(box, center, scale):
    """Interval of |(t - center)/scale| over an exact rectangle (floats, outward)."""
    (x1, y1), (x2, y2) = box
    cx, cy = float(sp.re(center)), float(sp.im(center))
    xs = (float(x1) - cx, float(x2) - cx)
    ys = (float(y1) - cy, float(y2) - cy)
    near_x = 0.0 if xs[0] <= 0 <= xs[1] else min(abs(xs[0]), abs(xs[1]))
    near_y = 0.0 if ys[0] <= 0 <= ys[1] else min(abs(ys[0]), abs(ys[1]))
    far = math.hypot(max(map(abs, xs)), max(map(abs, ys)))
    s = abs(complex(scale))
    return math.hypot(near_x, near_y) / s * (1 - 1e-12), far / s * (1 + 1e-12)


def exclusion_points(curve):
    """Ramification candidates and zeros of the leading ODE coefficients, as root boxes."""
    pts = []
    for name, P in curve.relations().items():
        if curve.explicit(name) is not None:
            continue
        disc = sp.discriminant(P, Y)
        lead = sp.Poly(P, Y).LC()
        a0 = annihilator(P).coefficients[0]
        for src, q in (("discriminant", disc), ("leading", lead), ("a0", a0.as_expr())):
            for box in _root_boxes(sp.expand(q)):
                pts.append({"coordinate": name, "source": src, "box": box})
    return pts


def good_annulus(curve, center=0, scale=1, lo=0.5, hi=0.75, points=None):
    """Annulus ``r - rho < |t| < r + rho`` inside (lo, hi) missing every exclusion disc.

    Exclusion discs have radius ``(hi - lo) / (9 * count)``; the annulus
    is centered in the widest free gap of moduli.
    """
    points = exclusion_points(curve) if points is None else points
    count = max(1, len(points))
    delta = (hi - lo) / (9 * count)
    blocked = []
    for p in points:
        a, b = _modulus_range(p["box"], sp.nsimplify(center), scale)
        blocked.append((a - delta, b + delta))
    blocked.sort()
    gaps, cursor = [], lo
    for a, b in blocked:
        if b <= cursor or a >= hi:
            if a >= hi:
                continue
            continue
        if a > cursor:
            gaps.append((cursor, min(a, hi)))
        cursor = max(cursor, b)
    if cursor < hi:
        gaps.append((cursor, hi))
    gaps = [g for g in gaps if g[1] > g[0]]
    if not gaps:
        raise PreconditionError("exclusion discs cover the whole range of radii",
                                {"points": len(points), "delta": delta})
    a, b = max(gaps, key=lambda g: g[1] - g[0])
    r = (a + b) / 2
    rho = (b - a) / 4
    dist = min((min(abs(r - rho - u), abs(r + rho - u), abs(r - rho - v), abs(r + rho - v))
                for u, v in ((x + delta, y - delta) for x, y in blocked)), default=math.inf)
    return r, rho, {"gap": (a, b), "exclusion_radius": delta, "points": len(points),
                    "distance_to_exclusions": dist}


def annulus_clear(r, rho, points, center=0, scale=1, delta=0.0):
    """True when no exclusion disc of radius ``delta`` meets the closed annulus."""
    for p in points:
        a, b = _modulus_range(p["box"], sp.nsimplify(center), scale)
        if not (b + delta < r - rho or a - delta > r + rho):
            return False
    return True


def min_leading_on_annulus(curve, r, rho, center=0, scale=1, samples=256):
    """Sampled ``min |a_0^j|`` over three circles of the annulus."""
    best = math.inf
    theta = np.exp(2j * np.pi * np.arange(samples) / samples)
    for name in curve.variables:
        if curve.explicit(name) is not None:
            continue
        a0 = annihilator(curve.relations()[name]).numeric()[0]
        for rad in (r - rho, r, r + rho):
            best = min(best, float(np.min(np.abs(a0(complex(center) + complex(scale) * rad * theta)))))
    return best


def branch_monodromy(P, radius, center=0, steps=2048):
    """Permutation of the roots of ``P(., t)`` after one loop ``|t - center| = radius``."""
    P = sp.Poly(P, Y, T)
    coeff = [sp.lambdify(T, c, "numpy") for c in sp.Poly(P.as_expr(), Y).all_coeffs()]

    def roots(t):
        return np.roots([complex(f(t)) for f in coeff])

    start = roots(center + radius)
    cur = start.copy()
    for s in range(1, steps + 1):
        nxt = roots(center + radius * np.exp(2j * np.pi * s / steps))
        used, order = set(), []
        for c in cur:
            k = min((i for i in range(len(nxt)) if i not in used), key=lambda i: abs(nxt[i] - c))
            used.add(k)
            order.append(nxt[k])
        cur = np.array(order)
    return [int(np.argmin(np.abs(start - c))) for c in cur]


# ---------------------------------------------------------------- zero counting

def count_zeros_on_curve(F, curve, center, radius, eps=1.0, config=None, pipeline=True):
    """Zeros of ``F`` on a plane curve inside a verified polydisc in the ball.

    Truth: zeros of ``t -> prod_i F(p_i(t))`` over the base disc by the
    argument principle.  Bound: the Bernstein zero bound on the half disc
    plus the index pipeline (branch indices, subadditivity, resultant
    indices), each reported with the calibration used.
    """
    config = config or DEFAULT
    if not isinstance(F, NoetherianFunction):
        raise PreconditionError("F must be a Noetherian function")
    if curve.n != 2:
        raise PreconditionError("zero counting is implemented for plane curves")
    W = AnalyticSet([curve.generators[0]], curve.variables, config)
    P = algebraic_polydisc(W, center, radius, config=config)
    Fs = AnalyticSet([F], curve.variables, config)
    R = np.vectorize(lambda z: analytic_resultant(W, P, Fs, [z]), otypes=[complex])
    zc, rz = complex(P.base_center[0]), float(P.base_radii[0])
    base = Disc(zc, rz)
    probe = R(zc + rz * np.array([0, 0.5, 1j * 0.5, -0.5, -0.5j, 0.3 + 0.2j, -0.25 + 0.4j]))
    fscale = max(1.0, float(np.max(np.abs(Fs.values(P.point(np.array([zc]),
                                                              np.array([[0.0], [0.5 * P.fiber_radii[0]]])))))))
    if np.max(np.abs(probe)) <= 1e-10 * fscale ** max(P.degree, 1):
        raise PreconditionError("F vanishes identically on the curve (sampled)")
    count, count_radius = count_zeros_perturbed(R, base, config, g=R)
    zb = check_zero_bound(R, base, eps, config=config) if pipeline else None
    report = {"count": count, "polydisc": P.to_dict(), "degree": P.degree, "count_radius": count_radius,
              "zero_bound": zb}
    if pipeline and P.degree:
        report["pipeline"] = _index_pipeline(F, curve, W, P, R, config)
    report["holds"] = zb["holds"] if zb else None
    return report


def _track_in_frame(curve, P, x0, b0, b1, steps=6, iters=30, tol=1e-13):
    """Follow the curve point ``x0`` while its polydisc base coordinate moves from b0 to b1."""
    row = np.linalg.inv(P.frame)[0]
    shift = row @ P.origin
    grads = [[g.diff(v).numeric(curve.variables) for v in curve.variables] for g in curve.generators]
    x = np.asarray(x0, dtype=complex).copy()
    for s in range(1, steps + 1):
        b = b0 + (b1 - b0) * s / steps
        for _ in range(iters):
            F = np.concatenate([curve.residuals(x), [row @ x - shift - b]])
            J = np.array([[complex(d(x)) for d in gr] for gr in grads] + [row])
            dx = np.linalg.lstsq(J, -F, rcond=None)[0]
            x = x + dx
            if np.linalg.norm(dx) <= tol * max(1.0, np.linalg.norm(x)):
                break
    return x


def _index_pipeline(F, curve, W, P, R, config):
    """Intermediate Bernstein indices of the resultant and its branches."""
    zc, rz = complex(P.base_center[0]), float(P.base_radii[0])
    frame_is_identity = np.allclose(P.frame, np.eye(2))
    out = {"calibration": config.constants()}
    if frame_is_identity:
        try:
            xc = complex(P.origin[0]) + zc
            r, rho, ann = good_annulus(curve, center=sp.nsimplify(round(xc.real, 12)) + sp.I * sp.nsimplify(round(xc.imag, 12)),
                                       scale=sp.nsimplify(rz))
        except PreconditionError as exc:
            return {**out, "annulus": str(exc)}
    else:
        r, rho, ann = 0.625, 1 / 16, {"note": "rotated frame; default annulus"}
    out["annulus"] = {"r": r, "rho": rho, **{k: v for k, v in ann.items() if k != "gap"}}
    tz = lambda t: zc + rz * np.asarray(t)
    theta = np.exp(2j * np.pi * np.arange(64) / 64)
    vals = np.abs(R(tz((r + rho) * theta)))
    t0 = complex((r + rho) * theta[int(np.argmax(vals))])
    t0 = t0 * r / abs(t0)
    Rt = lambda t: R(tz(t))
    local = Disc(t0, rho)
    # branches over t0 inside the fiber disc
    origin = P.point(np.array([tz(t0)]), P.fiber_center[None, :])[0]
    from .weierstrass import _poly_roots

    roots = _poly_roots(W.restricted_coefficients(origin, P.fiber_direction()))
    inside = [origin + w * P.fiber_direction() for w in roots if abs(w) < P.fiber_radii[0]]
    ev = Evaluator(F.chain, config)
    num = F.numeric()
    branch = []
    for p0 in inside:
        def g(ts, p0=p0):
            ts = np.atleast_1d(np.asarray(ts, dtype=complex))
            out_ = []
            for t in ts.ravel():
                p = _track_in_frame(curve, P, p0, complex(tz(t0)), complex(tz(t)), steps=6)
                vals_ = ev.values_at(p) if F.chain.ell else np.zeros(0)
                out_.append(num(np.concatenate([p, vals_])))
            return np.array(out_).reshape(ts.shape)
        rep = bernstein_index(g, local, gap=2, samples=96, config=config, g=g)
        branch.append(rep.index)
    factor = subadditivity_factor(len(branch), config)
    out["branch_indices"] = branch
    out["subadditive_bound"] = factor * sum(branch)
    res_local = bernstein_index(Rt, local, gap=2, samples=128, config=config, g=Rt).index
    out["resultant_local"] = res_local
    out["subadditivity_holds"] = bool(res_local <= out["subadditive_bound"] + 1e-9)
    out["resultant_gap"] = bernstein_index(Rt, Disc(0j, r + rho), Disc(0j, r + rho / 2), config=config, g=Rt).index
    out["resultant_annulus"] = bernstein_index(Rt, Disc(0j, r + rho), gap=2, config=config, g=Rt).index
    out["resultant_half"] = bernstein_index(Rt, Disc(0j, 0.5), gap=2, config=config, g=Rt).index
    return out


__all__ = ["ScalarODE", "annihilator", "slope", "AlgebraicCurve", "RestrictionSystem", "restriction_system",
           "good_annulus", "annulus_clear", "exclusion_points", "min_leading_on_annulus", "branch_monodromy",
           "count_zeros_on_curve", "to_sympy", "from_sympy"]
