"""Exact multivariate polynomials over the Gaussian rationals.

Coefficients are ``Fraction`` when real and :class:`GaussianRational`
otherwise, so arithmetic over Q stays on the fast ``Fraction`` path.
Variables are kept sorted by name; two polynomials are aligned on the
union of their variables before any binary operation.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import PrecisionError


class GaussianRational:
    """A number ``re + im*i`` with rational parts and ``im != 0``.

    Use :func:`coeff` to build values; it collapses to ``Fraction`` when
    the imaginary part vanishes.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _parts(x):
        if isinstance(x, GaussianRational):
            return x.re, x.im
        if isinstance(x, (Fraction, int)):
            return Fraction(x), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_coeff(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_coeff(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_coeff(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = p
        return make_coeff(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, d = p
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        a, b = self.re, self.im
        return make_coeff((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_coeff(*p) * self.inverse()

    def inverse(self):
        den = self.re * self.re + self.im * self.im
        return make_coeff(self.re / den, -self.im / den)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = Fraction(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __bool__(self):
        return True

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_coeff(self)


def make_coeff(re, im=0):
    """Return ``Fraction`` when ``im == 0``, else a GaussianRational."""
    im = Fraction(im)
    if im == 0:
        return Fraction(re)
    return GaussianRational(re, im)


def coeff(x):
    """Convert an exact scalar (int, Fraction, GaussianRational, str) to a coefficient.

    Floats are refused: conversion from binary floating point must be
    explicit, e.g. ``coeff(Fraction(0.1))``.
    """
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return parse_coeff(x)
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        raise TypeError("implicit float to exact conversion refused; wrap in Fraction first")
    raise TypeError(f"not an exact scalar: {x!r}")


def re_im(c):
    if isinstance(c, GaussianRational):
        return c.re, c.im
    return Fraction(c), Fraction(0)


def coeff_abs2(c):
    a, b = re_im(c)
    return a * a + b * b


def format_rational(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_coeff(c):
    """Canonical text for a coefficient: ``a/b`` or ``(a/b+c/d*i)``."""
    a, b = re_im(c)
    if b == 0:
        return format_rational(a)
    im = format_rational(abs(b))
    sign = "-" if b < 0 else "+"
    if a == 0:
        return f"({'-' if b < 0 else ''}{im}*i)"
    return f"({format_rational(a)}{sign}{im}*i)"


def parse_coeff(text):
    p = Polynomial.parse(text)
    if p.variables:
        raise ValueError(f"not a constant: {text!r}")
    return p.constant_term()


def _remap(exps, src, dst):
    idx = [dst.index(v) for v in src]
    out = [0] * len(dst)
    for k, e in zip(idx, exps):
        out[k] = e
    return tuple(out)


class Polynomial:
    """Sparse polynomial: sorted variable names plus ``{exponent tuple: coeff}``.

    Instances are treated as immutable.
    """

    __slots__ = ("variables", "_terms", "_numeric")

    def __init__(self, terms=None, variables=()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"repeated variable names: {variables}")
        for v in variables:
            if not _IDENT.fullmatch(v) or v in ("i", "I"):
                raise ValueError(f"bad variable name {v!r}")
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != len(variables) or any(k < 0 for k in e):
                raise ValueError(f"bad exponent {e} for variables {variables}")
            c = coeff(c)
            if c != 0:
                clean[e] = clean.get(e, Fraction(0)) + c
                if clean[e] == 0:
                    del clean[e]
        svars = tuple(sorted(variables))
        if svars != variables:
            clean = {_remap(e, variables, svars): c for e, c in clean.items()}
        self.variables = svars
        self._terms = clean
        self._numeric = None

    @classmethod
    def _raw(cls, terms, variables):
        p = cls.__new__(cls)
        p.variables = variables
        p._terms = terms
        p._numeric = None
        return p

    @classmethod
    def var(cls, name):
        return cls({(1,): 1}, (name,))

    @classmethod
    def const(cls, c, variables=()):
        variables = tuple(sorted(variables))
        return cls({(0,) * len(variables): coeff(c)}, variables)

    @classmethod
    def zero(cls, variables=()):
        return cls({}, tuple(sorted(variables)))

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def is_constant(self):
        return all(not any(e) for e in self._terms)

    def constant_term(self):
        return self._terms.get((0,) * len(self.variables), Fraction(0))

    def degree(self):
        """Total degree; ``-1`` for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, name):
        if name not in self.variables:
            return 0 if self._terms else -1
        k = self.variables.index(name)
        return max((e[k] for e in self._terms), default=-1)

    def max_norm(self):
        """Largest ``max(|Re c|, |Im c|)`` over the coefficients, exactly."""
        return max((max(abs(a), abs(b)) for a, b in map(re_im, self._terms.values())), default=Fraction(0))

    def max_norm_exact_sq(self):
        return max((coeff_abs2(c) for c in self._terms.values()), default=Fraction(0))

    def used_variables(self):
        used = set()
        for e in self._terms:
            for v, k in zip(self.variables, e):
                if k:
                    used.add(v)
        return tuple(sorted(used))

    def with_variables(self, variables):
        """Re-express over a superset of the current variables."""
        variables = tuple(sorted(set(variables)))
        if variables == self.variables:
            return self
        missing = set(self.used_variables()) - set(variables)
        if missing:
            raise ValueError(f"variables {sorted(missing)} in use")
        idx = [self.variables.index(v) if v in self.variables else -1 for v in variables]
        terms = {tuple(e[k] if k >= 0 else 0 for k in idx): c for e, c in self._terms.items()}
        return Polynomial._raw(terms, variables)

    def trimmed(self):
        return self.with_variables(self.used_variables())

    def _aligned(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(coeff(other), self.variables)
        if self.variables == other.variables:
            return self, other
        variables = tuple(sorted(set(self.variables) | set(other.variables)))
        return self.with_variables(variables), other.with_variables(variables)

    def __add__(self, other):
        try:
            a, b = self._aligned(other)
        except TypeError:
            return NotImplemented
        terms = dict(a._terms)
        for e, c in b._terms.items():
            s = terms.get(e, 0) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = s
        return Polynomial._raw(terms, a.variables)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({e: -c for e, c in self._terms.items()}, self.variables)

    def __sub__(self, other):
        try:
            a, b = self._aligned(other)
        except TypeError:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            try:
                c = coeff(other)
            except TypeError:
                return NotImplemented
            if c == 0:
                return Polynomial.zero(self.variables)
            return Polynomial._raw({e: v * c for e, v in self._terms.items()}, self.variables)
        a, b = self._aligned(other)
        terms = {}
        for e1, c1 in a._terms.items():
            for e2, c2 in b._terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = terms.get(e, 0) + c1 * c2
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return Polynomial._raw(terms, a.variables)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if not other.is_constant() or other.is_zero():
                raise ValueError("polynomial division only by nonzero constants")
            other = other.constant_term()
        c = coeff(other)
        if c == 0:
            raise ZeroDivisionError("division by zero")
        return self * (1 / c)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = Polynomial.const(1, self.variables)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            try:
                other = Polynomial.const(coeff(other))
            except TypeError:
                return NotImplemented
        a, b = self._aligned(other)
        return a._terms == b._terms

    def __hash__(self):
        t = self.trimmed()
        return hash((t.variables, frozenset(t._terms.items())))

    def diff(self, name):
        """Partial derivative in ``name``."""
        if name not in self.variables:
            return Polynomial.zero(self.variables)
        k = self.variables.index(name)
        terms = {}
        for e, c in self._terms.items():
            if e[k]:
                f = list(e)
                f[k] -= 1
                terms[tuple(f)] = c * e[k]
        return Polynomial._raw(terms, self.variables)

    def subs(self, mapping):
        """Substitute polynomials (or exact constants) for variables."""
        mapping = {v: (p if isinstance(p, Polynomial) else Polynomial.const(coeff(p)))
                   for v, p in mapping.items() if v in self.variables}
        if not mapping:
            return self
        keep = tuple(v for v in self.variables if v not in mapping)
        out = Polynomial.zero(keep)
        powers = {v: [Polynomial.const(1)] for v in mapping}
        for e, c in self._terms.items():
            term = Polynomial({tuple(e[self.variables.index(v)] for v in keep): c}, keep)
            for v, k in zip(self.variables, e):
                if v in mapping and k:
                    pw = powers[v]
                    while len(pw) <= k:
                        pw.append(pw[-1] * mapping[v])
                    term = term * pw[k]
            out = out + term
        return out

    def rename(self, mapping):
        """Rename variables; targets must not collide with untouched names."""
        names = [mapping.get(v, v) for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("renaming merges variables")
        return Polynomial(dict(self._terms), names)

    def directional_derive(self, field):
        """Apply the derivation ``sum_i field[i] * d/dx_i``.

        ``field`` is a mapping from variable name to Polynomial, or a
        sequence aligned with ``self.variables``.
        """
        if not isinstance(field, dict):
            field = list(field)
            if len(field) != len(self.variables):
                raise ValueError("field length must equal the variable count")
            field = dict(zip(self.variables, field))
        out = Polynomial.zero(self.variables)
        for v, f in field.items():
            if v in self.variables:
                d = self.diff(v)
                if not d.is_zero():
                    out = out + d * f
        return out

    def coefficients_in(self, name):
        """Coefficients as a list indexed by powers of ``name``."""
        if name not in self.variables:
            return [self]
        k = self.variables.index(name)
        rest = tuple(v for v in self.variables if v != name)
        buckets = {}
        for e, c in self._terms.items():
            buckets.setdefault(e[k], {})[e[:k] + e[k + 1:]] = c
        deg = max(buckets, default=-1)
        return [Polynomial._raw(buckets.get(j, {}), rest) for j in range(deg + 1)]

    def terms_in(self, order):
        """Terms with exponents listed in the variable order ``order``."""
        order = tuple(order)
        if order == self.variables:
            return dict(self._terms)
        missing = set(self.used_variables()) - set(order)
        if missing:
            raise ValueError(f"variables {sorted(missing)} missing from the order")
        idx = [order.index(v) if v in order else -1 for v in self.variables]
        out = {}
        for e, c in self._terms.items():
            f = [0] * len(order)
            for k, x in zip(idx, e):
                if k >= 0:
                    f[k] = x
            out[tuple(f)] = c
        return out

    def numeric(self, order=None):
        """Vectorized complex evaluator for points listed in ``order``.

        ``order`` defaults to the sorted variable names.
        """
        order = self.variables if order is None else tuple(order)
        if self._numeric is None:
            self._numeric = {}
        if order not in self._numeric:
            self._numeric[order] = NumericPolynomial(self, order)
        return self._numeric[order]

    def __call__(self, point):
        return self.eval(point)

    def _point_tuple(self, point):
        if isinstance(point, dict):
            return [point.get(v, 0) for v in self.variables]
        point = list(point)
        if len(point) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} coordinates, got {len(point)}")
        return point

    def eval_exact(self, point):
        point = [coeff(x) for x in self._point_tuple(point)]
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def eval(self, point, precision=53):
        """Evaluate at a point given as a sequence or name->value mapping."""
        return self.eval_with_bound(point, precision)[0]

    def eval_with_bound(self, point, precision=53):
        """Value and a rounding bound ``2**(1-p) * terms * max|term|``."""
        if precision < 8:
            raise PrecisionError(f"precision {precision} bits is below the supported floor of 8")
        point = self._point_tuple(point)
        if precision <= 53:
            xs = [complex(x) for x in point]
            total = 0j
            biggest = 0.0
            for e, c in self._terms.items():
                t = complex(c)
                for x, k in zip(xs, e):
                    if k:
                        t *= x ** k
                total += t
                biggest = max(biggest, abs(t))
            if not math.isfinite(abs(total)):
                raise PrecisionError("overflow in double precision evaluation")
            return total, 2.0 ** (1 - 53) * max(len(self._terms), 1) * biggest
        import mpmath

        with mpmath.workprec(precision):
            xs = [mpmath.mpc(_to_mp(x)) for x in point]
            total = mpmath.mpc(0)
            biggest = mpmath.mpf(0)
            for e, c in self._terms.items():
                a, b = re_im(c)
                t = mpmath.mpc(mpmath.mpf(a.numerator) / a.denominator,
                               mpmath.mpf(b.numerator) / b.denominator)
                for x, k in zip(xs, e):
                    if k:
                        t *= x ** k
                total += t
                biggest = max(biggest, abs(t))
            bound = mpmath.mpf(2) ** (1 - precision) * max(len(self._terms), 1) * biggest
            return total, bound

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda ec: (-sum(ec[0]), tuple(-k for k in ec[0])))

    def to_text(self):
        """Canonical text, e.g. ``3/2*x^2*y + (1-1/2*i)*y + -4``."""
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            cs = format_coeff(c)
            parts.append(f"{cs}*{mono}" if mono else cs)
        return " + ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial({self.to_text()!r})"

    @classmethod
    def parse(cls, text, variables=None):
        """Parse polynomial text (canonical form or ordinary infix)."""
        p = _PolyParser(text).parse()
        if variables is not None:
            p = p.with_variables(set(variables) | set(p.variables))
        return p


def _to_mp(x):
    import mpmath

    if isinstance(x, GaussianRational):
        return mpmath.mpc(mpmath.mpf(x.re.numerator) / x.re.denominator,
                          mpmath.mpf(x.im.numerator) / x.im.denominator)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)


class NumericPolynomial:
    """Complex128 evaluation of a Polynomial over arrays of points."""

    def __init__(self, p, order=None):
        self.variables = p.variables if order is None else tuple(order)
        items = list(p.terms_in(self.variables).items())
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), len(self.variables))
        self.coeffs = np.array([complex(c) for _, c in items], dtype=complex)
        self.maxdeg = int(self.exps.max()) if self.exps.size else 0

    def __call__(self, points):
        """``points`` has shape (..., nvars); returns shape (...)."""
        pts = np.asarray(points, dtype=complex)
        nv = len(self.variables)
        if nv == 0:
            shape = pts.shape[:-1] if pts.ndim else ()
            return np.full(shape, self.coeffs.sum() if self.coeffs.size else 0j)
        if pts.shape[-1] != nv:
            raise ValueError(f"expected last axis {nv}, got {pts.shape}")
        if not self.coeffs.size:
            return np.zeros(pts.shape[:-1], dtype=complex)
        powers = np.ones(pts.shape[:-1] + (len(self.coeffs),), dtype=complex)
        for k in range(nv):
            col = self.exps[:, k]
            if not col.any():
                continue
            table = pts[..., k, None] ** np.arange(col.max() + 1)
            powers = powers * table[..., col]
        return powers @ self.coeffs


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def tokenize(text):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize at {text[pos:]!r}")
        num, ident, sym = m.groups()
        if num is not None:
            out.append(("num", num, m.start(1)))
        elif ident is not None:
            out.append(("ident", ident, m.start(2)))
        else:
            out.append(("sym", sym, m.start(3)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def parse_number(tok):
    """Exact value of a decimal literal (``1.5e-3`` -> 3/2000)."""
    return Fraction(tok)


class _PolyParser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, sym=None):
        tok = self.toks[self.i]
        if sym is not None and tok[1] != sym:
            raise ValueError(f"expected {sym!r} at position {tok[2]} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        p = self.expr()
        if self.peek()[0] != "end":
            raise ValueError(f"trailing input at position {self.peek()[2]} in {self.text!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while True:
            kind, val, _ = self.peek()
            if val in ("*", "/"):
                self.take()
                q = self.unary()
                p = p * q if val == "*" else p / q
            elif kind in ("num", "ident") or val == "(":
                p = p * self.unary()
            else:
                return p

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        p = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ValueError(f"exponent must be a natural number at position {pos}")
            p = p ** int(val)
        return p

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Polynomial.const(parse_number(val))
        if kind == "ident":
            if val in ("i", "I"):
                return Polynomial.const(GaussianRational(0, 1))
            return Polynomial.var(val)
        if val == "(":
            p = self.expr()
            self.take(")")
            return p
        raise ValueError(f"unexpected {val!r} at position {pos} in {self.text!r}")


class ComplexBox:
    """Polydisc: per-coordinate complex centers and positive radii."""

    def __init__(self, centers, radii):
        self.centers = tuple(complex(c) for c in centers)
        self.radii = tuple(float(r) for r in radii)
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii differ in length")
        if any(not r > 0 for r in self.radii):
            raise ValueError("radii must be positive")

    @property
    def dim(self):
        return len(self.centers)

    def contains(self, point, margin=0.0):
        return all(abs(complex(x) - c) <= r * (1 + 1e-12) + margin
                   for x, c, r in zip(point, self.centers, self.radii))

    def distance_outside(self, point):
        return max((abs(complex(x) - c) - r for x, c, r in zip(point, self.centers, self.radii)), default=0.0)

    def inflate(self, amount):
        return ComplexBox(self.centers, [r + amount for r in self.radii])

    def scale(self, factor):
        return ComplexBox(self.centers, [r * factor for r in self.radii])

    def grid(self, level=2):
        """Nested sample grid: refining ``level`` only adds points."""
        axes = []
        for c, r in zip(self.centers, self.radii):
            nr = 2 ** level
            na = 2 ** (level + 2)
            pts = [c]
            for i in range(1, nr + 1):
                rad = r * i / nr
                pts.extend(c + rad * np.exp(2j * np.pi * np.arange(na) / na))
            axes.append(np.array(pts))
        if not axes:
            return np.zeros((1, 0), dtype=complex)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def to_dict(self):
        return {"centers": [[c.real, c.imag] for c in self.centers], "radii": list(self.radii)}

    @classmethod
    def from_dict(cls, d):
        return cls([complex(a, b) for a, b in d["centers"]], d["radii"])

    def __eq__(self, other):
        return isinstance(other, ComplexBox) and self.centers == other.centers and self.radii == other.radii

    def __repr__(self):
        return f"ComplexBox({self.centers}, {self.radii})"
