"""Numerical continuation of chains by Taylor jets.

Along a complex line ``x = x0 + t*u`` a chain restricts to a polynomial
ODE in the complex variable ``t``.  Its Taylor coefficients are computed
by evaluating the right-hand sides on truncated power series: every
monomial is a product of a parent monomial and one variable, so one
Cauchy product per monomial and order suffices.

Because ``t`` is complex, one jet covers a whole disc in the line, which
makes sampling circles cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .config import DEFAULT
from .errors import ContinuationError, PrecisionError
from .poly import Polynomial, re_im


class MonomialProgram:
    """Straight-line program computing every monomial of a set of polynomials."""

    def __init__(self, nvars, exponents):
        self.nvars = nvars
        index = {(0,) * nvars: 0}
        order = [(0,) * nvars]
        parent, var = [-1], [-1]

        def add(e):
            if e in index:
                return index[e]
            k = max(i for i, x in enumerate(e) if x)
            p = list(e)
            p[k] -= 1
            pi = add(tuple(p))
            index[e] = len(order)
            order.append(e)
            parent.append(pi)
            var.append(k)
            return index[e]

        for e in exponents:
            add(tuple(e))
        self.index = index
        self.exps = order
        degs = np.array([sum(e) for e in order])
        self.maxdeg = int(degs.max())
        parent = np.array(parent)
        var = np.array(var)
        self.levels = []
        for d in range(1, self.maxdeg + 1):
            nodes = np.nonzero(degs == d)[0]
            self.levels.append((nodes, parent[nodes], var[nodes]))

    @property
    def size(self):
        return len(self.exps)

    def series(self, X, order):
        """All monomial series given variable series ``X`` of shape (nvars, order+1)."""
        S = np.zeros((self.size, order + 1), dtype=complex)
        S[0, 0] = 1.0
        for k in range(order + 1):
            self.fill(S, X, k)
        return S

    def fill(self, S, X, k):
        for nodes, par, var in self.levels:
            if k == 0:
                S[nodes, 0] = S[par, 0] * X[var, 0]
            else:
                S[nodes, k] = np.einsum("ij,ij->i", S[par, : k + 1], X[var, k::-1])


class JetProgram:
    """Taylor-coefficient generator for one chain."""

    def __init__(self, chain):
        self.chain = chain
        names = chain.all_variables
        self.nvars = len(names)
        exps = set()
        for row in chain.rhs:
            for p in row:
                exps.update(p.terms_in(names))
        self.program = MonomialProgram(self.nvars, sorted(exps) or [(0,) * self.nvars])
        self.C = np.zeros((chain.ell, chain.n, self.program.size), dtype=complex)
        for i, row in enumerate(chain.rhs):
            for j, p in enumerate(row):
                for e, c in p.terms_in(names).items():
                    self.C[i, j, self.program.index[e]] += complex(c)

    def jet(self, position, values, direction, order):
        """Coefficients ``(ell, order+1)`` of ``y(position + t*direction)``."""
        chain = self.chain
        n, ell = chain.n, chain.ell
        X = np.zeros((self.nvars, order + 1), dtype=complex)
        X[:n, 0] = position
        if order >= 1:
            X[:n, 1] = direction
        X[n:, 0] = values
        if ell == 0:
            return X[n:]
        Cd = np.einsum("ijk,j->ik", self.C, np.asarray(direction, dtype=complex))
        S = np.zeros((self.program.size, order + 1), dtype=complex)
        S[0, 0] = 1.0
        for k in range(order):
            self.program.fill(S, X, k)
            X[n:, k + 1] = (Cd @ S[:, k]) / (k + 1)
        return X[n:]


@dataclass
class ChainState:
    position: np.ndarray
    values: np.ndarray
    error: float = 0.0
    steps: int = 0
    precision: int = 53


def _tail_ratio(c, h):
    """max over members of tail / (rtol-scaled magnitude) for step modulus h."""
    p = c.shape[1] - 1
    a = np.abs(c)
    powers = h ** np.arange(p + 1)
    mag = a @ powers
    tail = a[:, p] * powers[p] + a[:, p - 1] * powers[p - 1]
    return tail, mag


def admissible_radius(c, rtol, limit):
    """Largest step modulus (<= limit) whose tail passes the relative test."""
    if c.shape[0] == 0:
        return limit
    h = limit
    for _ in range(200):
        tail, mag = _tail_ratio(c, h)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(tail > 0, tail / (rtol * mag + 1e-300), 0.0)
        err = float(np.max(r))
        if err <= 1.0:
            return h
        p = c.shape[1] - 1
        h *= max(0.05, min(0.9, 0.9 * err ** (-1.0 / (p - 1))))
    return 0.0


def horner(c, t):
    """Evaluate coefficient rows ``c`` (m, p+1) at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=complex)
    out = np.zeros(c.shape[:1] + t.shape, dtype=complex)
    for k in range(c.shape[1] - 1, -1, -1):
        out = out * t + c[:, k].reshape(c.shape[:1] + (1,) * t.ndim)
    return out


def _check_precision(config):
    if config.precision > 53:
        raise PrecisionError("continuation runs in double precision; precision above 53 bits is not supported")


class Evaluator:
    """Evaluates a chain by continuation from its basepoint."""

    def __init__(self, chain, config=None, enforce_domain=True):
        self.chain = chain
        self.config = config or DEFAULT
        _check_precision(self.config)
        self.jets = JetProgram(chain)
        self.enforce_domain = enforce_domain
        self.steps = 0

    def base_state(self):
        c = self.chain
        return ChainState(np.array(c.basepoint, dtype=complex), np.array(c.initial_values, dtype=complex))

    def _check(self, point):
        if self.enforce_domain and not self.chain.domain.contains(point, margin=1e-9):
            raise ContinuationError("path leaves the chain domain", {"point": np.asarray(point).tolist()})

    def step_segment(self, state, target):
        """Continue ``state`` along the straight segment to ``target``."""
        target = np.asarray(target, dtype=complex)
        self._check(target)
        delta = target - state.position
        length = float(np.linalg.norm(delta))
        if length == 0.0:
            return state
        u = delta / length
        cfg = self.config
        pos, vals, err, steps = state.position.copy(), state.values.copy(), state.error, state.steps
        s = 0.0
        while s < length * (1 - 1e-15):
            remaining = length - s
            c = self.jets.jet(pos, vals, u, cfg.taylor_order)
            h = admissible_radius(c, cfg.rtol, remaining)
            if h < cfg.min_step * max(1.0, length) and h < remaining:
                raise ContinuationError("step size underflow", {"point": pos.tolist(), "step": h})
            if not np.all(np.isfinite(c)):
                raise ContinuationError("non-finite Taylor coefficients", {"point": pos.tolist()})
            if remaining - h < 1e-14 * length:
                h = remaining
                pos = target.copy()
            else:
                pos = pos + h * u
            vals = horner(c, h)
            tail, _ = _tail_ratio(c, h)
            err += float(np.max(tail)) if tail.size else 0.0
            s += h
            steps += 1
            self.steps += 1
            if steps > cfg.max_steps:
                raise ContinuationError("step budget exhausted", {"point": pos.tolist()})
        return ChainState(pos, vals, err, steps)

    def continue_along(self, path, state=None):
        state = state or self.base_state()
        for v in path:
            state = self.step_segment(state, v)
        return state

    def values_at(self, point):
        return self.continue_along([point]).values

    def values_along(self, points):
        """Values at each point, visiting points in order (shape (N, ell))."""
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        state = self.base_state()
        out = np.empty((len(points), self.chain.ell), dtype=complex)
        for k, p in enumerate(points):
            state = self.step_segment(state, p)
            out[k] = state.values
        return out

    def line(self, origin, direction, state=None):
        return LineSampler(self, origin, direction, state)

    def function_values(self, func, points):
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        vals = self.values_along(points)
        return func.numeric()(np.concatenate([points, vals], axis=1))


class LineSampler:
    """Chain values on a complex line ``origin + t*direction``, ``t`` complex.

    Jets are anchored at points of the line and reused for every query
    within their admissible radius.
    """

    def __init__(self, evaluator, origin, direction, state=None):
        self.ev = evaluator
        self.origin = np.asarray(origin, dtype=complex)
        d = np.asarray(direction, dtype=complex)
        self.direction = d / np.linalg.norm(d)
        if state is None:
            state = evaluator.continue_along([self.origin])
        self.anchor_t = []
        self.anchor_c = []
        self.anchor_h = []
        self._add_anchor(0j, state.values)

    def _add_anchor(self, t, values):
        cfg = self.ev.config
        pos = self.origin + t * self.direction
        self.ev._check(pos)
        c = self.ev.jets.jet(pos, values, self.direction, cfg.taylor_order)
        if not np.all(np.isfinite(c)):
            raise ContinuationError("non-finite Taylor coefficients", {"point": pos.tolist()})
        h = admissible_radius(c, cfg.rtol, 1e6)
        if h <= cfg.min_step:
            raise ContinuationError("step size underflow on line", {"point": pos.tolist()})
        self.anchor_t.append(complex(t))
        self.anchor_c.append(c)
        self.anchor_h.append(h)
        self.ev.steps += 1
        return len(self.anchor_t) - 1

    def _nearest(self, t):
        ts = np.array(self.anchor_t)
        hs = np.array(self.anchor_h)
        d = np.abs(ts - t)
        k = int(np.argmin(d / hs))
        return k, d[k] <= 0.9 * hs[k]

    def _reach(self, t):
        k, ok = self._nearest(t)
        guard = 0
        while not ok:
            ta, ha = self.anchor_t[k], self.anchor_h[k]
            gap = t - ta
            step = min(abs(gap), 0.8 * ha)
            tn = ta + gap / abs(gap) * step
            vals = horner(self.anchor_c[k], tn - ta)
            k = self._add_anchor(tn, vals)
            ok = abs(t - tn) <= 0.9 * self.anchor_h[k]
            guard += 1
            if guard > self.ev.config.max_steps:
                raise ContinuationError("step budget exhausted on line", {"t": complex(t)})
        return k

    def __call__(self, ts):
        """Member values, shape (ell,) + shape(ts)."""
        ts = np.asarray(ts, dtype=complex)
        flat = ts.ravel()
        out = np.empty((len(self.anchor_c[0]), flat.size), dtype=complex)
        # grow anchors until every query is covered, then evaluate per anchor
        while True:
            at = np.array(self.anchor_t)
            ah = np.array(self.anchor_h)
            ratio = np.abs(flat[:, None] - at[None, :]) / ah[None, :]
            owner = np.argmin(ratio, axis=1)
            bad = np.nonzero(ratio[np.arange(flat.size), owner] > 0.9)[0]
            if not bad.size:
                break
            self._reach(flat[bad[0]])
        for k in np.unique(owner):
            sel = owner == k
            out[:, sel] = horner(self.anchor_c[k], flat[sel] - self.anchor_t[k])
        return out.reshape((out.shape[0],) + ts.shape)

    def points(self, ts):
        ts = np.asarray(ts, dtype=complex)
        return self.origin + ts[..., None] * self.direction

    def function(self, func):
        """Callable ``t -> func(origin + t*direction)`` (vectorized)."""
        num = func.numeric()

        def f(ts):
            ts = np.asarray(ts, dtype=complex)
            vals = self(ts)
            pts = self.points(ts)
            full = np.concatenate([pts, np.moveaxis(vals, 0, -1)], axis=-1)
            return num(full)

        return f


def _mp_coeff(c):
    a, b = re_im(c)
    return mpmath.mpc(mpmath.mpf(a.numerator) / a.denominator, mpmath.mpf(b.numerator) / b.denominator)


class MPEvaluator:
    """Continuation in mpmath arithmetic at ``config.precision`` bits.

    Much slower than ``Evaluator``; meant for ill-conditioned systems
    (the j-function near its elliptic points loses about eight digits
    between 2i and i).  ``initial_values`` may carry high-precision
    initial data; by default the chain's double values are used.
    """

    def __init__(self, chain, config=None, enforce_domain=True, initial_values=None):
        self.chain = chain
        self.config = config or DEFAULT
        self.prec = max(int(self.config.precision), 53)
        self.enforce_domain = enforce_domain
        self.order = max(self.config.taylor_order, int(0.35 * self.prec))
        self.rtol = 2.0 ** (4 - self.prec)
        names = chain.all_variables
        self.nvars = len(names)
        exps = set()
        for row in chain.rhs:
            for q in row:
                exps.update(q.terms_in(names))
        prog = MonomialProgram(self.nvars, sorted(exps) or [(0,) * self.nvars])
        self.size = prog.size
        self.levels = [list(zip(nodes.tolist(), par.tolist(), var.tolist())) for nodes, par, var in prog.levels]
        with mpmath.workprec(self.prec):
            self.terms = [[[(prog.index[e], _mp_coeff(c)) for e, c in q.terms_in(names).items()] for q in row]
                          for row in chain.rhs]
            init = chain.initial_values if initial_values is None else initial_values
            self.initial = [mpmath.mpc(v) for v in init]
        self.steps = 0

    def base_state(self):
        with mpmath.workprec(self.prec):
            return ChainState([mpmath.mpc(b) for b in self.chain.basepoint], list(self.initial),
                              precision=self.prec)

    def jet(self, position, values, direction, order):
        chain = self.chain
        n, ell = chain.n, chain.ell
        zero = mpmath.mpc(0)
        X = [[zero] * (order + 1) for _ in range(self.nvars)]
        for j in range(n):
            X[j][0] = position[j]
            X[j][1] = direction[j]
        for i in range(ell):
            X[n + i][0] = values[i]
        Cd = []
        for i in range(ell):
            acc = {}
            for j in range(n):
                if direction[j] == 0:
                    continue
                for node, c in self.terms[i][j]:
                    acc[node] = acc.get(node, zero) + c * direction[j]
            Cd.append(list(acc.items()))
        S = [[zero] * (order + 1) for _ in range(self.size)]
        S[0][0] = mpmath.mpc(1)
        for k in range(order):
            for level in self.levels:
                for node, par, var in level:
                    S[node][k] = mpmath.fdot(S[par][: k + 1], X[var][k::-1])
            for i in range(ell):
                X[n + i][k + 1] = mpmath.fdot([c for _, c in Cd[i]], [S[node][k] for node, _ in Cd[i]]) / (k + 1)
        return [X[n + i] for i in range(ell)]

    def step_segment(self, state, target):
        cfg = self.config
        with mpmath.workprec(self.prec):
            target = [mpmath.mpc(t) for t in target]
            if self.enforce_domain and not self.chain.domain.contains([complex(t) for t in target], margin=1e-9):
                raise ContinuationError("path leaves the chain domain", {"point": [complex(t) for t in target]})
            delta = [t - p for t, p in zip(target, state.position)]
            length = mpmath.sqrt(mpmath.fsum(abs(d) ** 2 for d in delta))
            if length == 0:
                return state
            u = [d / length for d in delta]
            pos, vals, err, steps = list(state.position), list(state.values), state.error, state.steps
            s = mpmath.mpf(0)
            while length - s > length * mpmath.mpf(2) ** (-self.prec + 8):
                remaining = length - s
                c = self.jet(pos, vals, u, self.order)
                a = np.array([[float(abs(x)) for x in row] for row in c]).reshape(len(c), self.order + 1)
                h = admissible_radius(a, self.rtol, float(remaining))
                if h < cfg.min_step * max(1.0, float(length)) and h < remaining:
                    raise ContinuationError("step size underflow", {"point": [complex(p) for p in pos], "step": h})
                if h >= float(remaining) * (1 - 1e-12):
                    hm = remaining
                    pos = list(target)
                else:
                    hm = mpmath.mpf(h)
                    pos = [p + hm * d for p, d in zip(pos, u)]
                vals = [mpmath.polyval(row[::-1], hm) for row in c]
                tail, _ = _tail_ratio(a, float(hm))
                err += float(np.max(tail)) if tail.size else 0.0
                s += hm
                steps += 1
                self.steps += 1
                if steps > cfg.max_steps:
                    raise ContinuationError("step budget exhausted", {"point": [complex(p) for p in pos]})
            return ChainState(pos, vals, err, steps, self.prec)

    def continue_along(self, path, state=None):
        state = state or self.base_state()
        for v in path:
            state = self.step_segment(state, v)
        return state

    def values_at(self, point):
        return self.continue_along([point]).values

    def function_value(self, func, state):
        point = dict(zip(self.chain.all_variables, list(state.position) + list(state.values)))
        return func.poly.eval(point, precision=self.prec)


def make_evaluator(chain, config=None, enforce_domain=True, initial_values=None):
    """``Evaluator`` at 53 bits, ``MPEvaluator`` above."""
    config = config or DEFAULT
    if config.precision > 53:
        return MPEvaluator(chain, config, enforce_domain, initial_values)
    return Evaluator(chain, config, enforce_domain)


def taylor_step(chain, state, direction, step, config=None, jets=None):
    """One explicit step; the order grows until the tail estimate passes.

    Raises ContinuationError when no order up to ``config.taylor_order``
    meets the relative tolerance.
    """
    config = config or DEFAULT
    jets = jets or JetProgram(chain)
    d = np.asarray(direction, dtype=complex)
    d = d / np.linalg.norm(d)
    c = jets.jet(state.position, state.values, d, config.taylor_order)
    a = np.abs(c)
    scale = (a * step ** np.arange(c.shape[1])).sum(axis=1) + 1e-300
    for p in range(4, c.shape[1]):
        tail = a[:, p] * step ** p + a[:, p - 1] * step ** (p - 1)
        if np.all(tail <= config.rtol * scale):
            vals = horner(c[:, : p + 1], step)
            return ChainState(state.position + step * d, vals, state.error + float(np.max(tail, initial=0.0)),
                              state.steps + 1)
    raise ContinuationError("step rejected: tail estimate above tolerance at maximal order",
                            {"step": step, "point": state.position.tolist()})


def continue_along(chain, path, config=None, enforce_domain=True):
    """Final ChainState after following the polyline ``path`` from the basepoint."""
    return Evaluator(chain, config, enforce_domain).continue_along([np.atleast_1d(np.asarray(p, dtype=complex))
                                                                    for p in path])


def eval_function(func, path, config=None, enforce_domain=True):
    state = continue_along(func.chain, path, config, enforce_domain)
    full = np.concatenate([state.position, state.values])
    return complex(func.numeric()(full)), state


def series_of(poly, X, order=None):
    """Truncated series of ``poly`` on variable series ``X`` (nvars, p+1).

    Rows of ``X`` follow ``order`` (default: the polynomial's variables).
    """
    terms = poly.terms_in(poly.variables if order is None else order)
    order = X.shape[1] - 1
    out = np.zeros(order + 1, dtype=complex)
    cache = {}

    def power(k, e):
        key = (k, e)
        if key not in cache:
            if e == 1:
                cache[key] = X[k]
            else:
                cache[key] = np.convolve(power(k, e - 1), X[k])[: order + 1]
        return cache[key]

    for e, c in terms.items():
        term = np.zeros(order + 1, dtype=complex)
        term[0] = 1.0
        for k, ek in enumerate(e):
            if ek:
                term = np.convolve(term, power(k, ek))[: order + 1]
        out += complex(c) * term
    return out


def function_jet(func, position, direction, order, config=None, values=None, evaluator=None):
    """Taylor coefficients of ``func`` along ``position + t*direction``."""
    chain = func.chain
    ev = evaluator or Evaluator(chain, config)
    if values is None:
        values = ev.values_at(position)
    c = ev.jets.jet(np.asarray(position, dtype=complex), values, np.asarray(direction, dtype=complex), order)
    X = np.zeros((chain.n + chain.ell, order + 1), dtype=complex)
    X[: chain.n, 0] = position
    if order:
        X[: chain.n, 1] = direction
    X[chain.n:] = c
    names = chain.all_variables
    return series_of(func.poly, X, names)


def max_on_circle(f, radius, center=0j, samples=None, refine=True, config=None):
    """Sampled max of ``|f|`` on a circle plus a Lipschitz uncertainty.

    ``f`` maps complex arrays to complex arrays (for Noetherian
    functions use ``LineSampler.function``).  The reported ``max`` is a
    value actually attained, so it is a lower bound for the true max.
    """
    config = config or DEFAULT
    m = samples or config.circle_samples
    theta = 2 * np.pi * np.arange(m) / m
    z = center + radius * np.exp(1j * theta)
    v = np.abs(f(z))
    k = int(np.argmax(v))
    best, best_theta = float(v[k]), float(theta[k])
    dv = np.abs(np.diff(np.append(v, v[0])))
    lip = float(dv.max()) / (2 * np.pi / m)
    if refine and best > 0:
        lo, hi = best_theta - 2 * np.pi / m, best_theta + 2 * np.pi / m
        fine = np.linspace(lo, hi, 33)
        vf = np.abs(f(center + radius * np.exp(1j * fine)))
        j = int(np.argmax(vf))
        if vf[j] > best:
            best, best_theta = float(vf[j]), float(fine[j])
        lip_f = float(np.abs(np.diff(vf)).max()) / (fine[1] - fine[0])
        uncertainty = lip_f * (fine[1] - fine[0]) / 2
    else:
        uncertainty = lip * np.pi / m
    return {"max": best, "theta": best_theta, "witness": center + radius * np.exp(1j * best_theta),
            "uncertainty": float(uncertainty), "samples": m}


def path_length(path):
    pts = [np.asarray(p, dtype=complex) for p in path]
    return sum(float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:]))


def circle_path(center, radius, count=64, start=0.0):
    return [center + radius * complex(math.cos(start + 2 * math.pi * k / count), math.sin(start + 2 * math.pi * k / count))
            for k in range(count + 1)]


def poly_on_chain(chain, poly):
    return poly.with_variables(set(poly.variables) | set(chain.all_variables))


__all__ = ["Evaluator", "MPEvaluator", "make_evaluator", "LineSampler", "ChainState", "JetProgram", "taylor_step", "continue_along",
           "eval_function", "max_on_circle", "function_jet", "series_of", "horner", "Polynomial"]
