"""Noetherian chains and functions.

A chain on a polydisc in C^n is a tuple of functions ``y1..yl`` with
``d y_i / d x_j = rhs[i][j](x, y)`` for polynomials ``rhs[i][j]``.  A
Noetherian function is a polynomial in ``(x, y)`` over a chain.

Members are always named ``y1, y2, ...`` in chain order; closure
operations append members, so a function over a prefix of a chain is
still a function over the extended chain.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

import numpy as np

from .errors import PreconditionError
from .poly import ComplexBox, Polynomial, format_rational

MEMBER = re.compile(r"y\d+")
CHAIN_FORMAT = "noetherian-chain"
CHAIN_VERSION = 1


def member_names(ell, start=1):
    return tuple(f"y{k}" for k in range(start, start + ell))


class NoetherianChain:
    """A chain with domain, basepoint and initial values.

    ``alpha`` is the reported degree bound; it defaults to the actual
    maximum degree of the right-hand sides and is never smaller than it
    unless a closure lemma's formula says otherwise (see ``notes``).
    """

    def __init__(self, xvars, rhs, domain, basepoint, initial_values, alpha=None,
                 declared_ns=None, notes=None):
        self.xvars = tuple(xvars)
        for v in self.xvars:
            if MEMBER.fullmatch(v):
                raise ValueError(f"coordinate name {v!r} clashes with member names")
        self.ell = len(rhs)
        names = self.all_variables
        self.rhs = []
        for i, row in enumerate(rhs):
            row = list(row)
            if len(row) != self.n:
                raise ValueError(f"rhs row {i} has {len(row)} entries, expected n={self.n}")
            clean = []
            for p in row:
                p = p if isinstance(p, Polynomial) else Polynomial.const(p)
                extra = set(p.used_variables()) - set(names)
                if extra:
                    raise ValueError(f"rhs[{i}] uses unknown variables {sorted(extra)}")
                clean.append(p.with_variables(names))
            self.rhs.append(clean)
        if not isinstance(domain, ComplexBox) or domain.dim != self.n:
            raise ValueError("domain must be a ComplexBox of dimension n")
        self.domain = domain
        self.basepoint = tuple(complex(x) for x in basepoint)
        self.initial_values = tuple(complex(v) for v in initial_values)
        if len(self.basepoint) != self.n or len(self.initial_values) != self.ell:
            raise ValueError("basepoint/initial values have the wrong length")
        actual = self.actual_alpha
        self.alpha = actual if alpha is None else int(alpha)
        self.declared_ns = declared_ns
        self.notes = dict(notes or {})

    @property
    def n(self):
        return len(self.xvars)

    @property
    def members(self):
        return member_names(self.ell)

    @property
    def all_variables(self):
        return self.xvars + member_names(self.ell)

    @property
    def actual_alpha(self):
        return max((p.degree() for row in self.rhs for p in row), default=0) if self.ell else 0

    @property
    def params(self):
        return (self.n, self.ell, self.alpha)

    def lie(self, poly, j):
        """Derivative of ``poly(x, y(x))`` in the coordinate ``x_j``."""
        if isinstance(j, str):
            j = self.xvars.index(j)
        poly = poly.with_variables(set(poly.variables) | set(self.all_variables))
        out = poly.diff(self.xvars[j])
        for i, m in enumerate(self.members):
            d = poly.diff(m)
            if not d.is_zero():
                out = out + d * self.rhs[i][j]
        return out

    def function(self, poly, beta=None):
        return NoetherianFunction(self, poly, beta)

    def member(self, i):
        """The i-th member (0-based) as a function of degree 1."""
        return NoetherianFunction(self, Polynomial.var(self.members[i]), 1)

    def coordinate(self, j):
        return NoetherianFunction(self, Polynomial.var(self.xvars[j]), 1)

    def replace(self, **kw):
        args = dict(xvars=self.xvars, rhs=self.rhs, domain=self.domain, basepoint=self.basepoint,
                    initial_values=self.initial_values, alpha=self.alpha,
                    declared_ns=self.declared_ns, notes=self.notes)
        args.update(kw)
        return NoetherianChain(**args)

    def to_dict(self):
        return {
            "format": CHAIN_FORMAT,
            "version": CHAIN_VERSION,
            "n": self.n,
            "ell": self.ell,
            "alpha": self.alpha,
            "xvars": list(self.xvars),
            "rhs": [[p.to_text() for p in row] for row in self.rhs],
            "domain": self.domain.to_dict(),
            "basepoint": [[z.real, z.imag] for z in self.basepoint],
            "initial_values": [[z.real, z.imag] for z in self.initial_values],
            "declared_NS": None if self.declared_ns is None else _num_text(self.declared_ns),
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format", CHAIN_FORMAT) != CHAIN_FORMAT or d.get("version") != CHAIN_VERSION:
            raise ValueError(f"unsupported chain container version {d.get('version')!r}")
        xvars = tuple(d["xvars"])
        rhs = [[Polynomial.parse(t) for t in row] for row in d["rhs"]]
        if len(rhs) != d["ell"] or len(xvars) != d["n"]:
            raise ValueError("n/ell disagree with the stored rhs")
        ns = d.get("declared_NS")
        return cls(xvars, rhs, ComplexBox.from_dict(d["domain"]),
                   [complex(a, b) for a, b in d["basepoint"]],
                   [complex(a, b) for a, b in d["initial_values"]],
                   alpha=d.get("alpha"), declared_ns=None if ns is None else _parse_num(ns),
                   notes=d.get("notes"))

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def same_as(self, other):
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"NoetherianChain(n={self.n}, ell={self.ell}, alpha={self.alpha}, xvars={self.xvars})"


def _num_text(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    return repr(float(x))


def _parse_num(text):
    if isinstance(text, (int, float)):
        return text
    if "/" in text or text.lstrip("-").isdigit():
        return Fraction(text)
    return float(text)


class NoetherianFunction:
    """``poly(x, y)`` over a chain; ``beta`` is the reported degree bound."""

    def __init__(self, chain, poly, beta=None):
        poly = poly if isinstance(poly, Polynomial) else Polynomial.const(poly)
        extra = set(poly.used_variables()) - set(chain.all_variables)
        if extra:
            raise ValueError(f"function uses variables outside the chain: {sorted(extra)}")
        self.chain = chain
        self.poly = poly.with_variables(chain.all_variables)
        self.beta = max(self.poly.degree(), 0) if beta is None else int(beta)

    @property
    def actual_beta(self):
        return max(self.poly.degree(), 0)

    @property
    def params(self):
        return self.chain.params + (self.beta,)

    def numeric(self):
        """Evaluator taking points ordered as ``chain.all_variables``."""
        return self.poly.numeric(self.chain.all_variables)

    def on_chain(self, chain):
        """Same polynomial over an extension of this function's chain."""
        return NoetherianFunction(chain, self.poly, self.beta)

    def value_at_basepoint(self):
        c = self.chain
        return self.numeric()(np.array(c.basepoint + c.initial_values))

    def __repr__(self):
        return f"NoetherianFunction({self.poly.to_text()!r}, params={self.params})"


class RationalSystem:
    """A chain whose right-hand sides are sums of fractions ``Q/R``.

    ``rhs[i][j]`` is a list of ``(Q, R)`` pairs of Polynomials.
    """

    def __init__(self, xvars, rhs, domain, basepoint, initial_values):
        self.xvars = tuple(xvars)
        self.ell = len(rhs)
        self.rhs = [[[(q, r) for q, r in entry] for entry in row] for row in rhs]
        self.domain = domain
        self.basepoint = tuple(complex(x) for x in basepoint)
        self.initial_values = tuple(complex(v) for v in initial_values)

    @property
    def n(self):
        return len(self.xvars)

    def denominators(self):
        seen = []
        for row in self.rhs:
            for entry in row:
                for _, r in entry:
                    if not r.is_constant() and not any(_proportional(r, s) for s in seen):
                        seen.append(r)
        return seen


def _proportional(a, b):
    """Exact test ``a = c * b`` for a nonzero constant c."""
    a = a.trimmed()
    b = b.trimmed()
    if a.variables != b.variables or len(a) != len(b):
        return False
    ta, tb = a.terms, b.terms
    if set(ta) != set(tb):
        return False
    e0 = next(iter(ta))
    c = ta[e0] / tb[e0]
    return all(ta[e] == c * tb[e] for e in ta)


def integrability_defects(chain):
    """Symbolic defects ``D_k rhs[i][j] - D_j rhs[i][k]`` that are nonzero."""
    out = []
    for i in range(chain.ell):
        for j in range(chain.n):
            for k in range(j + 1, chain.n):
                d = chain.lie(chain.rhs[i][j], k) - chain.lie(chain.rhs[i][k], j)
                if not d.is_zero():
                    out.append((i, j, k, d))
    return out


def verify_integrability(chain, sample_points=0, tol=1e-8, config=None):
    """Check that the rules define a consistent system.

    Returns a dict with ``status`` one of ``consistent`` (symbolic
    identity), ``consistent_on_solution`` (defects vanish on the
    solution at sampled points) or ``inconsistent``, plus the first
    violating index triple and its defect polynomial.
    """
    defects = integrability_defects(chain)
    if not defects:
        return {"status": "consistent", "violation": None}
    i, j, k, d = defects[0]
    first = {"member": i, "coords": (j, k), "defect": d.to_text()}
    if not sample_points:
        return {"status": "inconsistent", "violation": first}
    from .evaluate import Evaluator

    ev = Evaluator(chain, config=config)
    pts = chain.domain.scale(0.5).grid(1)[:sample_points]
    worst = 0.0
    for p in pts:
        vals = ev.values_at(p)
        full = np.concatenate([p, vals])
        scale = 1.0 + float(np.max(np.abs(full)))
        for (i, j, k, d) in defects:
            r = abs(d.numeric(chain.all_variables)(full)) / scale ** max(d.degree(), 1)
            if r > worst:
                worst = r
            if r > tol:
                return {"status": "inconsistent", "violation": first,
                        "witness": {"point": p.tolist(), "member": i, "coords": (j, k), "residual": r}}
    return {"status": "consistent_on_solution", "violation": first, "max_residual": worst,
            "samples": len(pts)}


def noetherian_size(chain, level=None, evaluator=None, config=None):
    """Sampled ``max(|x|, |y|, |rhs| coefficients)``, clamped below at 2.

    The sample grid is nested in ``level`` so the estimate never drops
    when the grid is refined.
    """
    from .config import DEFAULT
    from .evaluate import Evaluator

    config = config or DEFAULT
    level = config.domain_grid_level if level is None else level
    coef = float(max((p.max_norm() for row in chain.rhs for p in row), default=0))
    best = max(coef, max(float(np.max(np.abs(chain.domain.centers))) + max(chain.domain.radii), 0.0))
    witness = None
    if chain.ell:
        ev = evaluator or Evaluator(chain, config=config)
        pts = chain.domain.grid(level)
        vals = ev.values_along(pts)
        mags = np.max(np.abs(vals), axis=1)
        k = int(np.argmax(mags))
        if mags[k] > best:
            best = float(mags[k])
            witness = pts[k]
    return {"NS": max(2.0, best), "raw": best, "witness": witness, "level": level}


def check_member_names(chain):
    return chain.members == member_names(chain.ell)


def require(cond, message, witness=None):
    if not cond:
        raise PreconditionError(message, witness)
