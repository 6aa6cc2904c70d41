"""Rational and low-degree algebraic points of bounded height on zero sets.

Points are enumerated exactly, screened numerically along lines and
confirmed exactly when the set is algebraic.  ``explore`` covers the
points by hypersurfaces fitted through them (exact nullspaces) and
recurses on the intersections until every point sits either in a
component on which the set's equations vanish identically (a germ
certificate) or in a zero-dimensional leaf.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp
from sympy.polys.matrices import DomainMatrix

from .config import DEFAULT
from .errors import BudgetExceeded, NoetherianError, PreconditionError
from .ideal_chain import buchberger, to_sparse
from .poly import Polynomial
from .weierstrass import AnalyticSet, as_set


# ---------------------------------------------------------------- heights

def height(q):
    """``max(|a|, |b|)`` in lowest terms, maximized over coordinates."""
    if isinstance(q, (list, tuple, np.ndarray)):
        return max((height(x) for x in q), default=1)
    q = Fraction(q)
    return max(abs(q.numerator), q.denominator)


def fmt_rational(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rationals_in(lo, hi, H):
    """Sorted reduced fractions in [lo, hi] of height at most H."""
    lo, hi = Fraction(lo), Fraction(hi)
    out = []
    for b in range(1, H + 1):
        a0 = math.ceil(lo * b)
        a1 = math.floor(hi * b)
        for a in range(max(a0, -H), min(a1, H) + 1):
            if math.gcd(a, b) == 1:
                out.append(Fraction(a, b))
    out.sort()
    return out


def enumerate_rationals(box, H):
    """All rational vectors in the box with every coordinate of height <= H."""
    if H < 1:
        raise PreconditionError("height bound must be at least 1")
    lists = [rationals_in(lo, hi, H) for lo, hi in box]
    return itertools.product(*lists)


def farey_count(H):
    """``1 + sum_{q <= H} phi(q)``."""
    return 1 + sum(int(sp.totient(q)) for q in range(1, H + 1))


# ---------------------------------------------------------------- algebraic numbers

def _primitive(coeffs):
    """Integer primitive vector with positive leading entry (lowest degree first)."""
    fr = [Fraction(c) for c in coeffs]
    while fr and fr[-1] == 0:
        fr.pop()
    if not fr:
        raise ValueError("zero polynomial")
    den = math.lcm(*(c.denominator for c in fr))
    ints = [int(c * den) for c in fr]
    g = math.gcd(*ints)
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return ints


def minimal_polynomial(alpha):
    """Primitive integer minimal polynomial (lowest degree first) and a numeric value.

    ``alpha`` is a sympy algebraic expression, a rational, or a pair
    ``(coefficients, approximate value)``.
    """
    x = sp.Symbol("x")
    if isinstance(alpha, tuple) and len(alpha) == 2 and isinstance(alpha[0], (list, tuple)):
        coeffs, approx = alpha
        P = sp.Poly(sum(sp.nsimplify(c) * x ** i for i, c in enumerate(coeffs)), x)
        best = None
        for fac, _ in P.factor_list()[1]:
            roots = np.roots([complex(c) for c in fac.all_coeffs()]) if fac.degree() > 0 else []
            for r in roots:
                d = abs(r - complex(approx))
                if best is None or d < best[0]:
                    best = (d, fac, r)
        _, fac, val = best
        return _primitive([sp.Rational(c) for c in fac.all_coeffs()[::-1]]), complex(val)
    expr = sp.nsimplify(alpha) if not isinstance(alpha, sp.Basic) else alpha
    m = sp.minimal_polynomial(expr, x)
    return _primitive([sp.Rational(c) for c in sp.Poly(m, x).all_coeffs()[::-1]]), complex(sp.N(expr, 30))


def mahler_height(minpoly):
    """Absolute multiplicative height ``M(m)^(1/deg)``."""
    c = [float(v) for v in minpoly]
    roots = np.roots(c[::-1])
    M = abs(c[-1]) * float(np.prod([max(1.0, abs(r)) for r in roots]))
    return M ** (1.0 / (len(c) - 1))


def _divisible(c, m):
    """Is the polynomial with integer coefficients ``c`` a multiple of ``m`` (exact)?"""
    x = sp.Symbol("x")
    P = sp.Poly(sum(v * x ** i for i, v in enumerate(c)), x)
    Q = sp.Poly(sum(v * x ** i for i, v in enumerate(m)), x)
    return P.rem(Q).is_zero


def poly_height(alpha, k, limit=None):
    """Smallest height of a nonzero defining vector of degree <= k.

    Exact search over primitive integer vectors by increasing height, up
    to ``2^k H(alpha)^k``.  Returns (height, vector) or (inf, None) when
    the degree exceeds k.
    """
    m, _ = minimal_polynomial(alpha)
    deg = len(m) - 1
    if deg > k:
        return math.inf, None
    Habs = mahler_height(m)
    bound = 2 ** k * Habs ** k
    cap = max(m, key=abs)
    cap = min(abs(cap), limit or abs(cap))
    for h in range(1, int(cap) + 1):
        for c in itertools.product(range(-h, h + 1), repeat=k + 1):
            if max(map(abs, c)) != h or not any(c):
                continue
            if _divisible(list(c), m):
                if h > bound * (1 + 1e-12):
                    raise AssertionError("polynomial height exceeds 2^k H^k")
                return h, list(c)
    return abs(max(m, key=abs)), m


# ---------------------------------------------------------------- points on sets

@dataclass
class HeightedPoint:
    coordinates: tuple
    height: int
    residual: float = 0.0
    exact: bool = False
    minpolys: tuple = None

    def value(self):
        return np.array([complex(c) if not isinstance(c, Fraction) else float(c) for c in self.coordinates],
                        dtype=complex)

    def to_dict(self):
        out = {"coordinates": [fmt_rational(c) if isinstance(c, Fraction) else [complex(c).real, complex(c).imag]
                               for c in self.coordinates],
               "height": self.height, "residual": self.residual, "exact": self.exact}
        if self.minpolys:
            out["minpolys"] = [list(map(int, m)) for m in self.minpolys]
        return out


@dataclass
class PointCensus:
    points: list
    near_misses: list
    log: list = field(default_factory=list)
    H: int = None

    def up_to(self, H):
        return [p for p in self.points if p.height <= H]


def _gradient_scale(X, p, h=1e-5):
    """``max(1, |grad F_j|)`` per generator by central differences."""
    n = len(p)
    pts = []
    for i in range(n):
        for s in (1, -1):
            q = np.array(p, dtype=complex)
            q[i] += s * h
            pts.append(q)
    v = X.values(np.array(pts))
    grads = (v[:, 0::2] - v[:, 1::2]) / (2 * h)
    return np.maximum(1.0, np.linalg.norm(grads, axis=1))


def points_on_set(X, box, H, tol=1e-12, variables=None, prefilter=1e-6, config=None):
    """Rational points of height <= H in the real box lying on ``X``.

    Numeric membership is ``|F_j| <= tol * max(1, |grad F_j|)``; points
    within ten times that are reported as near misses.  Algebraic sets are
    decided by exact substitution.
    """
    config = config or DEFAULT
    X = as_set(X, variables, config)
    n = len(box)
    if X.n != n:
        raise PreconditionError("box dimension differs from the ambient dimension")
    lists = [rationals_in(lo, hi, H) for lo, hi in box]
    last = np.array([float(q) for q in lists[-1]])
    mid = (float(box[-1][0]) + float(box[-1][1])) / 2
    e_last = np.zeros(n, dtype=complex)
    e_last[-1] = 1
    algebraic = X.is_algebraic
    points, near, log = [], [], []
    for prefix in itertools.product(*lists[:-1]):
        origin = np.array([float(q) for q in prefix] + [mid], dtype=complex)
        try:
            vals = X.fiber(origin, e_last)(last - mid)
        except NoetherianError as exc:
            log.append({"prefix": [fmt_rational(q) for q in prefix], "error": str(exc)})
            continue
        res = np.max(np.abs(vals), axis=0)
        scale = max(1.0, float(np.max(np.abs(vals))))
        for idx in np.nonzero(res <= prefilter * scale)[0]:
            q = tuple(prefix) + (lists[-1][idx],)
            if algebraic:
                if all(f.eval_exact(_exact_point(f, X.variables, q)) == 0 for f in X.functions):
                    points.append(HeightedPoint(q, height(q), 0.0, True))
                continue
            pc = np.array([float(v) for v in q], dtype=complex)
            try:
                fv = np.abs(X.values(pc[None, :])[:, 0])
                s = _gradient_scale(X, pc)
            except NoetherianError as exc:
                log.append({"point": [fmt_rational(v) for v in q], "error": str(exc)})
                continue
            ratio = float(np.max(fv / s))
            if ratio <= tol:
                points.append(HeightedPoint(q, height(q), float(np.max(fv)), False))
            elif ratio <= 10 * tol:
                near.append(HeightedPoint(q, height(q), float(np.max(fv)), False))
    return PointCensus(points, near, log, H)


def _exact_point(f, variables, q):
    lookup = dict(zip(variables, q))
    return tuple(lookup[v] for v in f.variables)


# ---------------------------------------------------------------- hypersurface fits

def monomials(n, d):
    """Exponent tuples of total degree <= d, graded then lexicographic."""
    out = []
    for deg in range(d + 1):
        for e in itertools.product(range(deg + 1), repeat=n):
            if sum(e) == deg:
                out.append(e)
    return sorted(out, key=lambda e: (sum(e), tuple(-x for x in e)))


@dataclass
class HypersurfaceFit:
    degree: int
    polynomial: Polynomial
    coefficients: list
    monomials: list
    points: list
    witness: object = None
    witness_value: object = None

    def to_dict(self):
        return {"degree": self.degree, "polynomial": self.polynomial.to_text(),
                "coefficients": [fmt_rational(c) for c in self.coefficients],
                "points": [[fmt_rational(c) for c in p] for p in self.points],
                "witness": None if self.witness is None else
                [fmt_rational(c) if isinstance(c, Fraction) else [complex(c).real, complex(c).imag]
                 for c in self.witness]}


def _nullspace_rational(rows, cols):
    M = DomainMatrix([[sp.QQ(v.numerator, v.denominator) for v in r] for r in rows], (len(rows), cols), sp.QQ)
    N = M.nullspace().to_Matrix()
    return [[Fraction(int(sp.Rational(x).p), int(sp.Rational(x).q)) for x in N.row(i)] for i in range(N.rows)]


def sample_on_variety(generators, variables, near, count=6, spread=0.05, rng=None, tol=1e-11):
    """Points of the variety near ``near`` by Gauss-Newton projection of random starts."""
    rng = rng or np.random.default_rng(0)
    near = np.asarray([complex(v) for v in near])
    if not generators:
        return [near + spread * (rng.normal(size=len(near)) + 1j * rng.normal(size=len(near)))
                for _ in range(count)]
    nums = [g.numeric(variables) for g in generators]
    grads = [[g.diff(v).numeric(variables) for v in variables] for g in generators]
    out = []
    for _ in range(8 * count):
        x = near + spread * (rng.normal(size=len(near)) + 1j * rng.normal(size=len(near)))
        for _ in range(40):
            F = np.array([f(x) for f in nums])
            J = np.array([[d(x) for d in row] for row in grads])
            dx = np.linalg.lstsq(J, -F, rcond=None)[0]
            x = x + dx
            if np.linalg.norm(dx) < 1e-14:
                break
        if max(abs(f(x)) for f in nums) < tol and np.linalg.norm(x - near) < 10 * spread:
            out.append(x)
            if len(out) >= count:
                break
    return out


def vanishes_on(F_values, generators, variables, near_points, tol=1e-9, rng=None, spread=0.05):
    """Sampled test: do the functions vanish on the variety near the given points?"""
    rng = rng or np.random.default_rng(1)
    samples = []
    for p in near_points[:4]:
        samples.extend(sample_on_variety(generators, variables, p, 4, spread, rng))
    if not samples:
        return None
    vals = np.abs(F_values(np.array(samples)))
    scale = max(1.0, float(np.max(vals)))
    return bool(np.max(vals) <= tol * scale) if vals.size else None


def _ideal_member(P, generators, variables):
    if not generators:
        return P.is_zero()
    try:
        gb = buchberger([to_sparse(g, variables) for g in generators], variables, max_basis=60, max_degree=12)
    except BudgetExceeded:
        return None
    return gb.contains(to_sparse(P, variables))


def fit_hypersurface(points, d, W=None, variables=None, rng=None):
    """Polynomial of degree <= d vanishing exactly at every point and not on W.

    ``W`` is a list of generator Polynomials (empty or None for the whole
    space).  Nullspace basis elements are tried first, then small random
    integer combinations.
    """
    points = [tuple(Fraction(c) for c in p) for p in points]
    if not points:
        raise PreconditionError("no points to fit")
    n = len(points[0])
    variables = tuple(variables or [f"x{i + 1}" for i in range(n)])
    W = list(W or [])
    mons = monomials(n, d)
    rows = [[math.prod(c ** e for c, e in zip(p, m)) for m in mons] for p in points]
    null = _nullspace_rational(rows, len(mons))
    if not null:
        raise PreconditionError(f"no hypersurface of degree {d} through the points", {"points": len(points)})
    rng = rng or np.random.default_rng(0)
    candidates = list(null)
    for _ in range(6):
        r = rng.integers(-3, 4, size=len(null))
        if any(r):
            candidates.append([sum(int(ri) * v[j] for ri, v in zip(r, null)) for j in range(len(mons))])
    for vec in candidates:
        den = math.lcm(*(c.denominator for c in vec))
        ints = [c * den for c in vec]
        g = math.gcd(*(int(c) for c in ints))
        vec = [Fraction(int(c) // g) for c in ints]
        P = Polynomial({m: c for m, c in zip(mons, vec) if c}, variables)
        if P.is_zero():
            continue
        assert all(P.eval_exact(_exact_point(P, variables, p)) == 0 for p in points)
        witness, wval = _non_containment_witness(P, W, variables, points, rng)
        if witness is not None:
            return HypersurfaceFit(d, P, vec, mons, points, witness, wval)
    raise PreconditionError("every fitted hypersurface contains W; raise the degree", {"degree": d})


def _non_containment_witness(P, W, variables, points, rng):
    """A point of W where P is nonzero (exact rational when W is the whole space)."""
    if not W:
        for q in itertools.product(*[range(-2, 3)] * len(variables)):
            q = tuple(Fraction(v) for v in q)
            v = P.eval_exact(_exact_point(P, variables, q))
            if v != 0:
                return q, v
        return None, None
    if _ideal_member(P, W, variables):
        return None, None
    num = P.numeric(variables)
    for p in points[:4]:
        for s in sample_on_variety(W, variables, [float(c) for c in p], 6, 0.1, rng):
            v = num(s)
            if abs(v) > 1e-8:
                return tuple(s), v
    return None, None


# ---------------------------------------------------------------- exploration

@dataclass
class Node:
    id: int
    generators: list
    depth: int
    points: list
    kind: str = "internal"
    children: list = field(default_factory=list)
    fit: HypersurfaceFit = None
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return {"id": self.id, "kind": self.kind, "depth": self.depth,
                "variety": [g.to_text() for g in self.generators],
                "points": [[fmt_rational(c) for c in p] for p in self.points],
                "fit": self.fit.to_dict() if self.fit else None, "flags": self.flags,
                "children": [c.to_dict() for c in self.children]}


@dataclass
class ExplorationTree:
    root: Node
    variables: tuple
    census: PointCensus
    nodes: list

    def leaves(self):
        return [nd for nd in self.nodes if not nd.children]

    def leaf_points(self):
        out = []
        for nd in self.leaves():
            out.extend(nd.points)
        return out

    def isolated_points(self):
        return [p for nd in self.leaves() if nd.kind == "isolated" for p in nd.points]

    def covers(self, points):
        """Every point lies on some leaf variety (exact) and in that leaf's list."""
        for p in points:
            p = tuple(Fraction(c) for c in p)
            ok = False
            for nd in self.leaves():
                if p in nd.points and all(g.eval_exact(_exact_point(g, self.variables, p)) == 0
                                          for g in nd.generators):
                    ok = True
                    break
            if not ok:
                return False
        return True

    def to_dict(self):
        return {"variables": list(self.variables), "root": self.root.to_dict(), "H": self.census.H}


def explore(X, W0=None, box=None, H=8, eps=0.5, config=None, variables=None, max_degree=4, max_nodes=200,
            census=None):
    """Cover the rational points of X by germ certificates and isolated leaves."""
    config = config or DEFAULT
    Xs = as_set(X, variables, config)
    variables = Xs.variables
    n = Xs.n
    census = census or points_on_set(Xs, box, H, config=config)
    if W0 is None:
        W0 = [f for f in Xs.functions] if Xs.is_algebraic else []
    W0 = [g.with_variables(set(g.variables) | set(variables)) for g in W0]
    nodes = []
    rng = np.random.default_rng(config.seed)
    pts = [p.coordinates for p in census.points]
    root = Node(0, W0, 0, pts)
    nodes.append(root)
    weights = [Fraction(int(v)) for v in rng.integers(1, 7, size=len(Xs.functions))]

    def combo(points):
        v = Xs.values(points)
        return np.tensordot(np.array([float(w) for w in weights]), v, axes=1)

    def visit(node):
        if len(nodes) > max_nodes:
            node.kind = "unresolved"
            node.flags["budget"] = "node budget exhausted"
            return
        if not node.points:
            node.kind = "empty"
            return
        dim = n - len(node.generators)
        if dim <= 0:
            node.kind = "isolated"
            return
        near = [[float(c) for c in p] for p in node.points]
        if Xs.is_algebraic:
            member = all(_ideal_member(f.with_variables(set(f.variables) | set(variables)), node.generators, variables)
                         for f in Xs.functions) if node.generators else all(f.is_zero() for f in Xs.functions)
            vanish = member if member is not None else vanishes_on(combo, node.generators, variables, near)
        else:
            vanish = vanishes_on(combo, node.generators, variables, near)
        if vanish:
            node.kind = "certificate"
            node.flags["certificate"] = "X contains the variety near its points (sampled germ check)" \
                if not Xs.is_algebraic else "equations of X lie in the ideal of the variety"
            return
        if node.depth >= n:
            node.kind = "unresolved"
            return
        cells = max(1, math.ceil(H ** (eps / n)))
        groups = {}
        for p in node.points:
            key = tuple(min(cells - 1, int((float(c) - float(lo)) / max(float(hi - lo), 1e-300) * cells))
                        for c, (lo, hi) in zip(p, box))
            groups.setdefault(key, []).append(p)
        nu = math.prod(max(g.degree(), 1) for g in node.generators) if node.generators else 1
        schedule = math.ceil(config.degree_cal * nu ** (n - dim) * eps ** (-dim) * max(1.0, math.log(H)) ** dim)
        node.flags["degree_schedule"] = schedule
        for key in sorted(groups):
            cell_pts = groups[key]
            fit = None
            for d in range(1, min(max_degree, max(schedule, 1)) + 1):
                try:
                    fit = fit_hypersurface(cell_pts, d, node.generators, variables, rng)
                    break
                except PreconditionError:
                    continue
            if fit is None:
                child = Node(len(nodes), node.generators, node.depth + 1, cell_pts, "unresolved",
                             flags={"reason": "no fit within the degree cap", "cell": list(key)})
                nodes.append(child)
                node.children.append(child)
                continue
            node.fit = node.fit or fit
            remaining = list(cell_pts)
            for factor in _factors(fit.polynomial, variables):
                on = [p for p in remaining if factor.eval_exact(_exact_point(factor, variables, p)) == 0]
                if not on:
                    continue
                remaining = [p for p in remaining if p not in on]
                child = Node(len(nodes), node.generators + [factor], node.depth + 1, on,
                             flags={"cell": list(key), "fit_degree": fit.degree,
                                    "decomposition": "exact" if not node.generators and n <= 3 else "cycle"})
                nodes.append(child)
                node.children.append(child)
                visit(child)

    visit(root)
    return ExplorationTree(root, variables, census, nodes)


def _factors(P, variables):
    syms = {v: sp.Symbol(v) for v in variables}
    from .curve_ode import from_sympy, to_sympy

    expr = to_sympy(P, syms)
    out = []
    for fac, _ in sp.factor_list(expr)[1]:
        if fac.free_symbols:
            out.append(from_sympy(sp.Poly(fac, *[syms[v] for v in variables]), variables))
    return out or [P]


# ---------------------------------------------------------------- algebraic lift

@dataclass
class AlgebraicCandidate:
    value: complex
    minpoly: list
    poly_height: int


def algebraic_numbers(lo, hi, k, H):
    """Real algebraic numbers in [lo, hi] of degree <= k with a defining vector of height <= H.

    Defining vectors are normalized into the window ``1/2 < max|c| < 2``;
    each number keeps the smallest height found.
    """
    found = {}
    x = sp.Symbol("x")
    for c in itertools.product(range(-H, H + 1), repeat=k + 1):
        if not any(c) or math.gcd(*c) != 1:
            continue
        m = max(abs(v) for v in c)
        # normalized vector c/m lies in the window and has height m for primitive c
        h = max(height(Fraction(v, m)) for v in c)
        if h > H:
            continue
        P = sp.Poly(sum(v * x ** i for i, v in enumerate(c)), x)
        if P.degree() <= 0:
            continue
        for fac, _ in P.factor_list()[1]:
            if fac.degree() <= 0:
                continue
            mp = _primitive([sp.Rational(v) for v in fac.all_coeffs()[::-1]])
            for r in fac.real_roots():
                if sp.Rational(str(lo)) <= r <= sp.Rational(str(hi)):
                    key = (tuple(mp), round(float(r), 12))
                    if key not in found or found[key].poly_height > h:
                        found[key] = AlgebraicCandidate(float(r), mp, h)
    return sorted(found.values(), key=lambda a: (a.value, a.poly_height))


@dataclass
class LiftedSet:
    """``Y = {(x, c) : x in X, P_{c_j}(x_j) = 0}`` over box x coefficient space."""

    X: AnalyticSet
    k: int
    variables: tuple
    sigma: list

    def zero_locus(self):
        n = self.X.n

        def lifted(points, X=self.X):
            return X.values(np.asarray(points)[..., :n])

        funcs = [lambda p, j=j, X=self.X: lifted(p)[j] for j in range(len(self.X.functions))]
        return AnalyticSet(funcs + self.sigma, self.variables)


def lift_variety(X, k, variables=None, config=None):
    if k < 1:
        raise PreconditionError("k must be at least 1")
    Xs = as_set(X, variables, config)
    cvars = [f"c{j + 1}_{i}" for j in range(Xs.n) for i in range(k + 1)]
    allv = Xs.variables + tuple(cvars)
    sigma = []
    for j, v in enumerate(Xs.variables):
        P = Polynomial.zero(allv)
        for i in range(k + 1):
            P = P + Polynomial.var(f"c{j + 1}_{i}") * Polynomial.var(v) ** i
        sigma.append(P.with_variables(allv))
    return LiftedSet(Xs, k, allv, sigma)


def algebraic_census(lifted, box, H, tol=1e-10):
    """Points of X whose coordinates have degree <= k and pi_2-height <= H."""
    X = lifted.X
    per_coord = [algebraic_numbers(lo, hi, lifted.k, H) for lo, hi in box]
    out = []
    for combo in itertools.product(*per_coord):
        p = np.array([a.value for a in combo], dtype=complex)
        vals = np.abs(X.values(p[None, :])[:, 0])
        if X.is_algebraic:
            ok = bool(np.max(vals) <= tol * max(1.0, max(abs(a.value) for a in combo)) ** 8)
        else:
            ok = bool(np.max(vals / _gradient_scale(X, p)) <= tol)
        if ok:
            h = max(a.poly_height for a in combo)
            out.append(HeightedPoint(tuple(a.value for a in combo), h, float(np.max(vals)), False,
                                     tuple(tuple(a.minpoly) for a in combo)))
    return out


# ---------------------------------------------------------------- reports

def growth_slope(Hs, counts):
    """Least-squares slope of log count against log H over positive counts."""
    pts = [(math.log(h), math.log(c)) for h, c in zip(Hs, counts) if c > 0 and h > 1]
    if len(pts) < 2:
        return 0.0
    x, y = np.array(pts).T
    if np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def census_report(X, box, H_list, eps=0.5, variables=None, config=None, explore_tree=True):
    """Counts per height with a growth fit and leaf attribution."""
    config = config or DEFAULT
    Xs = as_set(X, variables, config)
    Hmax = max(H_list)
    census = points_on_set(Xs, box, Hmax, config=config)
    tree = explore(Xs, box=box, H=Hmax, eps=eps, config=config, census=census) if explore_tree else None
    leaf_of = {}
    if tree:
        for nd in tree.leaves():
            for p in nd.points:
                leaf_of.setdefault(p, nd)
    rows, counts, trans = [], [], []
    for H in sorted(H_list):
        pts = census.up_to(H)
        counts.append(len(pts))
        iso = [p for p in pts if tree and leaf_of.get(p.coordinates) is not None
               and leaf_of[p.coordinates].kind == "isolated"]
        trans.append(len(iso) if tree else len(pts))
        by_leaf = {}
        for p in pts:
            nd = leaf_of.get(p.coordinates)
            key = (nd.id, nd.kind) if nd else (-1, "uncovered")
            by_leaf[key] = by_leaf.get(key, 0) + 1
        for (lid, kind), c in sorted(by_leaf.items()):
            rows.append({"H": H, "count": c, "leaf_id": lid, "certificate_kind": kind})
        if not by_leaf:
            rows.append({"H": H, "count": 0, "leaf_id": -1, "certificate_kind": "none"})
    slope = growth_slope(sorted(H_list), trans)
    slope_all = growth_slope(sorted(H_list), counts)
    notes = []
    if tree and counts[-1] and trans[-1] == 0:
        notes.append("all points lie in germ certificates; the algebraic part dominates")
    return {"H": sorted(H_list), "counts": counts, "isolated_counts": trans, "slope": slope, "slope_all": slope_all,
            "super_eps": bool(slope > eps), "rows": rows, "notes": notes,
            "near_misses": [p.to_dict() for p in census.near_misses], "log": census.log,
            "tree": tree.to_dict() if tree else None}


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["H", "count", "leaf_id", "certificate_kind"])
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


__all__ = ["height", "rationals_in", "enumerate_rationals", "farey_count", "minimal_polynomial", "mahler_height",
           "poly_height", "HeightedPoint", "PointCensus", "points_on_set", "monomials", "HypersurfaceFit",
           "fit_hypersurface", "sample_on_variety", "ExplorationTree", "explore", "lift_variety",
           "algebraic_numbers", "algebraic_census", "growth_slope", "census_report", "rows_to_csv"]
