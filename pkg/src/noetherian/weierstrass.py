"""Weierstrass polydiscs, fiber degrees and analytic resultants.

A polydisc is described in a unitary frame: ambient points are
``origin + Q @ (z, w)`` with base coordinates ``z`` first and fiber
coordinates ``w`` last.  It is a Weierstrass polydisc for ``X`` when no
point of ``X`` lies over the closed base with fiber on the boundary of
the fiber polydisc; projection to the base is then a finite cover whose
degree is counted in single fibers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .bernstein import Disc, count_zeros_disc, low_value_disc, restrict, sphere_directions, winding_number
from .chain import NoetherianFunction
from .config import DEFAULT
from .errors import PreconditionError
from .evaluate import Evaluator
from .poly import ComplexBox, Polynomial


class AnalyticSet:
    """Common zeros of ``functions`` in C^n.

    Generators are Polynomials (over ``variables``, the ambient
    coordinate order), NoetherianFunctions (ambient order = chain
    coordinates) or callables on point arrays of shape (..., n).
    """

    def __init__(self, functions, variables=None, config=None):
        self.functions = list(functions)
        if not self.functions:
            raise ValueError("an analytic set needs at least one generator")
        self.config = config or DEFAULT
        nf = [f for f in self.functions if isinstance(f, NoetherianFunction)]
        if variables is None:
            if nf:
                variables = nf[0].chain.xvars
            else:
                names = set()
                for f in self.functions:
                    if isinstance(f, Polynomial):
                        names |= set(f.used_variables())
                variables = tuple(sorted(names))
        self.variables = tuple(variables)
        for f in nf:
            if f.chain.xvars != self.variables:
                raise PreconditionError("Noetherian generators must use the ambient coordinates")
        self._evaluators = {}
        self._num = []
        for f in self.functions:
            if isinstance(f, Polynomial):
                num = f.numeric(self.variables)
                self._num.append(lambda p, num=num: num(p))
            elif isinstance(f, NoetherianFunction):
                self._num.append(self._noetherian_values(f))
            elif callable(f):
                self._num.append(f)
            else:
                raise TypeError(type(f))

    @property
    def n(self):
        return len(self.variables)

    @property
    def is_algebraic(self):
        return all(isinstance(f, Polynomial) for f in self.functions)

    def _noetherian_values(self, f):
        chain = f.chain
        num = f.numeric()

        def values(points):
            points = np.asarray(points, dtype=complex)
            flat = points.reshape(-1, chain.n)
            ev = self._evaluators.setdefault(id(chain), Evaluator(chain, self.config))
            out = np.empty(len(flat), dtype=complex)
            for k, p in enumerate(flat):
                vals = ev.values_at(p) if chain.ell else np.zeros(0)
                out[k] = num(np.concatenate([p, vals]))
            return out.reshape(points.shape[:-1])

        return values

    def values(self, points):
        """Generator values, shape (k,) + points.shape[:-1]."""
        points = np.asarray(points, dtype=complex)
        return np.stack([np.asarray(g(points), dtype=complex) for g in self._num])

    def fiber(self, origin, direction):
        """``t -> values(origin + t*direction)`` (vectorized in t)."""
        origin = np.asarray(origin, dtype=complex)
        direction = np.asarray(direction, dtype=complex)
        parts = []
        for f, g in zip(self.functions, self._num):
            if isinstance(f, NoetherianFunction) and f.chain.ell:
                sampler = Evaluator(f.chain, self.config).line(origin, direction)
                h = sampler.function(f)
                scale = np.linalg.norm(direction)
                parts.append(lambda t, h=h, s=scale: h(np.asarray(t, dtype=complex) * s))
            else:
                parts.append(lambda t, g=g: g(origin + np.asarray(t, dtype=complex)[..., None] * direction))
        return lambda t: np.stack([np.asarray(p(t), dtype=complex) for p in parts])

    def restricted_coefficients(self, origin, direction, k=0):
        """Coefficients (lowest first) of generator ``k`` on the line, algebraic only."""
        f = self.functions[k]
        if not isinstance(f, Polynomial):
            raise PreconditionError("restricted coefficients need a polynomial generator")
        d = max(f.degree(), 0)
        size = 1 << max(1, (d + 1 - 1).bit_length())
        t = np.exp(2j * np.pi * np.arange(size) / size)
        vals = self._num[k](np.asarray(origin, dtype=complex) + t[:, None] * np.asarray(direction, dtype=complex))
        c = np.fft.fft(vals) / size
        return c[: d + 1]


def algebraic_variety(polys, variables=None):
    return AnalyticSet([p if isinstance(p, Polynomial) else Polynomial.parse(p) for p in polys], variables)


def as_set(obj, variables=None, config=None):
    if isinstance(obj, AnalyticSet):
        return obj
    if isinstance(obj, (list, tuple)):
        return AnalyticSet(obj, variables, config)
    return AnalyticSet([obj], variables, config)


def _poly_roots(coeffs, scale=1e-13):
    """Roots of sum c_k t^k, dropping negligible leading coefficients."""
    c = np.array(coeffs, dtype=complex)
    top = float(np.max(np.abs(c))) if c.size else 0.0
    while c.size > 1 and abs(c[-1]) <= scale * top:
        c = c[:-1]
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    r = np.roots(c[::-1])
    # Newton polish on the restricted polynomial
    dc = np.polyder(c[::-1])
    for _ in range(3):
        d = np.polyval(dc, r)
        ok = np.abs(d) > 1e-300
        r = np.where(ok, r - np.polyval(c[::-1], r) / np.where(ok, d, 1), r)
    return r


@dataclass
class WeierstrassPolydisc:
    origin: np.ndarray
    frame: np.ndarray
    base_center: np.ndarray
    base_radii: np.ndarray
    fiber_center: np.ndarray
    fiber_radii: np.ndarray
    degree: int = None
    margin: float = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=complex)
        self.frame = np.asarray(self.frame, dtype=complex)
        self.base_center = np.atleast_1d(np.asarray(self.base_center, dtype=complex))
        self.base_radii = np.atleast_1d(np.asarray(self.base_radii, dtype=float))
        self.fiber_center = np.atleast_1d(np.asarray(self.fiber_center, dtype=complex))
        self.fiber_radii = np.atleast_1d(np.asarray(self.fiber_radii, dtype=float))
        n = len(self.origin)
        if self.frame.shape != (n, n) or self.m + self.k != n:
            raise ValueError("frame and polyradii do not match the ambient dimension")
        if not np.allclose(self.frame.conj().T @ self.frame, np.eye(n), atol=1e-10):
            raise ValueError("frame must be unitary")

    @property
    def m(self):
        return len(self.base_center)

    @property
    def k(self):
        return len(self.fiber_center)

    def point(self, z, w):
        u = np.concatenate([np.broadcast_to(z, np.shape(w)[:-1] + (self.m,)), w], axis=-1)
        return self.origin + u @ self.frame.T

    def fiber_direction(self, j=0):
        return self.frame[:, self.m + j]

    def base_samples(self, level=1):
        if self.m == 0:
            return np.zeros((1, 0), dtype=complex)
        return ComplexBox(list(self.base_center), list(self.base_radii)).grid(level)

    def contains_ball(self):
        """Radius of the largest ball around the center inside the polydisc."""
        return float(min(np.min(self.base_radii, initial=np.inf), np.min(self.fiber_radii)))

    def outer_radius(self):
        return float(np.sqrt(np.sum(self.base_radii ** 2) + np.sum(self.fiber_radii ** 2)))

    def to_dict(self):
        cx = lambda a: [[complex(v).real, complex(v).imag] for v in np.ravel(a)]
        return {"origin": cx(self.origin), "frame": [cx(row) for row in self.frame],
                "base_center": cx(self.base_center), "base_radii": self.base_radii.tolist(),
                "fiber_center": cx(self.fiber_center), "fiber_radii": self.fiber_radii.tolist(),
                "degree": self.degree, "margin": self.margin, "notes": self.notes}


def _fiber_boundary(P, samples):
    """Points of the boundary of the fiber polydisc (in w coordinates)."""
    theta = np.exp(2j * np.pi * np.arange(samples) / samples)
    if P.k == 1:
        return (P.fiber_center[0] + P.fiber_radii[0] * theta)[:, None]
    pieces = []
    closed = [ComplexBox([c], [r]).grid(1)[:, 0] for c, r in zip(P.fiber_center, P.fiber_radii)]
    for j in range(P.k):
        axes = [closed[i] if i != j else P.fiber_center[j] + P.fiber_radii[j] * theta for i in range(P.k)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pieces.append(np.stack([a.ravel() for a in mesh], axis=-1))
    return np.concatenate(pieces)


def verify_polydisc(X, P, base_level=1, fiber_samples=96, tol=1e-10):
    """Sampled check that ``X`` misses (closed base) x (fiber boundary).

    Returns ``{"ok", "margin", "witness"}``: ``margin`` is the smallest
    sampled ``max_k |f_k|`` and must exceed ``tol`` times the largest
    sampled value.
    """
    X = as_set(X)
    W = _fiber_boundary(P, fiber_samples)
    margin, witness, top = np.inf, None, 0.0
    for z in P.base_samples(base_level):
        pts = P.point(z, W)
        vals = np.max(np.abs(X.values(pts)), axis=0)
        top = max(top, float(np.max(vals)))
        k = int(np.argmin(vals))
        if vals[k] < margin:
            margin, witness = float(vals[k]), pts[k]
    ok = bool(np.isfinite(margin) and margin > tol * max(top, 1e-300))
    return {"ok": ok, "margin": margin, "scale": top,
            "witness": None if witness is None else [complex(v) for v in witness]}


def fiber_count(X, P, z, samples=128):
    """Points of ``X`` in the fiber over ``z`` (fiber dimension one)."""
    X = as_set(X)
    if P.k != 1:
        raise PreconditionError("fiber counting is implemented for one fiber coordinate")
    origin = P.point(z, P.fiber_center[None, :])[0]
    direction = P.fiber_direction()
    if X.is_algebraic and len(X.functions) == 1:
        roots = _poly_roots(X.restricted_coefficients(origin, direction))
        return int(np.sum(np.abs(roots) < P.fiber_radii[0]))
    if len(X.functions) != 1:
        raise PreconditionError("fiber counting by the argument principle needs a hypersurface")
    g = X.fiber(origin, direction)
    n, _ = winding_number(lambda t: g(t)[0], 0j, float(P.fiber_radii[0]), samples)
    return n


def degree(X, P, base_level=1):
    """Fiber counts over the sampled base; ``degree`` is set when they agree."""
    X = as_set(X)
    counts = [fiber_count(X, P, z) for z in P.base_samples(base_level)]
    constant = len(set(counts)) == 1
    return {"degree": counts[0] if constant else None, "constant": constant,
            "counts": counts, "samples": len(counts)}


def _frame_with_fiber(u):
    """Unitary frame whose last column is the unit vector ``u``."""
    n = len(u)
    A = np.column_stack([u, np.eye(n, dtype=complex)])
    Q, _ = np.linalg.qr(A)
    Q = Q[:, :n]
    Q[:, 0] = u
    return np.column_stack([Q[:, 1:], Q[:, :1]])


def hypersurface_polydisc(R, center, radius, variables=None, line_samples=64, max_retries=10, config=None,
                          base_level=1):
    """Weierstrass polydisc for ``{R = 0}`` between a shrunk ball and the ball.

    The fiber line passes through the center and a sampled near-maximum
    of ``|R|`` on the sphere; the fiber disc comes from the low-value
    disc of the restriction, the base radius from a Cauchy estimate.
    """
    config = config or DEFAULT
    X = as_set(R, variables, config)
    center = np.asarray(center, dtype=complex)
    n = len(center)
    if n == 1:
        dirs = np.ones((1, 1), dtype=complex)
    else:
        dirs = np.concatenate([np.eye(n, dtype=complex), sphere_directions(n, line_samples, config.seed)])
    on_sphere = np.abs(X.values(center + radius * dirs)[0])
    kmax = int(np.argmax(on_sphere))
    M_B = float(on_sphere[kmax])
    if not M_B > 0:
        raise PreconditionError("R vanishes at every sampled point of the sphere")
    u = dirs[kmax] / np.linalg.norm(dirs[kmax])
    g = X.fiber(center, u)
    line_fn = lambda t: g(t)[0]
    D, m, low = low_value_disc(line_fn, Disc(0j, radius), config=config)
    M_B = max(M_B, low["M_U"])
    frame = _frame_with_fiber(u)
    base_r = m * radius / (4 * M_B * max(1.0, math.sqrt(n - 1))) if n > 1 else 0.0
    e_central = count_zeros_disc(line_fn, D, config=config)
    for attempt in range(max_retries):
        P = WeierstrassPolydisc(center, frame, np.zeros(n - 1), np.full(n - 1, base_r),
                                np.zeros(1), np.array([D.radius]))
        check = verify_polydisc(X, P, base_level)
        if check["ok"]:
            deg = degree(X, P, base_level) if n > 1 else {"degree": e_central, "constant": True, "counts": [e_central]}
            if deg["constant"] and deg["degree"] == e_central:
                P.degree = e_central
                P.margin = check["margin"]
                P.notes = {"M_B": M_B, "low_value": m, "fiber_radius": D.radius, "base_radius": base_r,
                           "eta": radius / P.contains_ball(), "attempts": attempt + 1,
                           "fiber_counts": deg["counts"], "low_value_report": _clean(low)}
                return P
        base_r /= 2
    raise PreconditionError("hypersurface polydisc did not verify after shrinking the base",
                            {"center": center.tolist(), "radius": radius})


def _clean(d):
    return {k: (complex(v) if isinstance(v, complex) else v) for k, v in d.items() if k != "witness"}


def analytic_resultant(W, P, F, z, variables=None):
    """Product of ``F`` over the points of ``W`` in the fiber over ``z``."""
    W = as_set(W)
    if not (W.is_algebraic and len(W.functions) == 1 and P.k == 1):
        raise PreconditionError("analytic resultants are built over algebraic hypersurface fibers")
    Fs = as_set(F, variables or W.variables)
    origin = P.point(np.asarray(z, dtype=complex), P.fiber_center[None, :])[0]
    roots = _poly_roots(W.restricted_coefficients(origin, P.fiber_direction()))
    inside = roots[np.abs(roots) < P.fiber_radii[0]]
    if inside.size == 0:
        return complex(1.0)
    pts = origin + inside[:, None] * P.fiber_direction()
    return complex(np.prod(Fs.values(pts)[0]))


def resultant_function(W, P, F, variables=None):
    """Vectorized base-point function ``z -> R_F(z)`` (base points shape (..., m))."""
    W = as_set(W)
    Fs = as_set(F, variables or W.variables)

    def R(zs):
        zs = np.asarray(zs, dtype=complex)
        flat = zs.reshape(-1, P.m)
        out = np.array([analytic_resultant(W, P, Fs, z) for z in flat], dtype=complex)
        return out.reshape(zs.shape[:-1])

    return R


def intersect_polydisc(W, P, F, bz_center, bz_radius, variables=None, config=None, vanish_tol=1e-10):
    """Weierstrass polydisc for ``W`` cut by ``{F = 0}`` over a ball in the base."""
    config = config or DEFAULT
    W = as_set(W)
    bz_center = np.atleast_1d(np.asarray(bz_center, dtype=complex))
    box = ComplexBox(list(P.base_center), list(P.base_radii))
    if not box.contains(bz_center) or np.any(np.abs(bz_center - P.base_center) + bz_radius > P.base_radii * (1 + 1e-12)):
        raise PreconditionError("base ball is not inside the base polydisc")
    Rfun = resultant_function(W, P, F, variables)
    probe = ComplexBox(list(bz_center), [bz_radius] * P.m).grid(1)
    vals = np.abs(Rfun(probe))
    if not np.max(vals) > vanish_tol * max(1.0, float(np.max(vals))) or np.max(vals) == 0:
        raise PreconditionError("F vanishes identically on the covered component (sampled)",
                                {"max_resultant": float(np.max(vals))})
    H = hypersurface_polydisc(Rfun, bz_center, bz_radius, config=config)
    m = P.m
    block = np.eye(len(P.origin), dtype=complex)
    block[:m, :m] = H.frame
    frame = P.frame @ block
    origin = P.origin + P.frame @ np.concatenate([bz_center, np.zeros(P.k)])
    out = WeierstrassPolydisc(origin, frame, H.base_center, H.base_radii,
                              np.concatenate([H.fiber_center, P.fiber_center]),
                              np.concatenate([H.fiber_radii, P.fiber_radii]))
    Fs = as_set(F, variables or W.variables)
    X_F = AnalyticSet(W.functions + Fs.functions, W.variables)
    check = verify_polydisc(X_F, out, fiber_samples=48)
    if not check["ok"]:
        raise PreconditionError("intersection polydisc failed verification", check)
    out.degree = H.degree
    out.margin = check["margin"]
    out.notes = {"resultant_polydisc": H.notes, "base_ball": [bz_center.tolist(), bz_radius]}
    return out


def algebraic_polydisc(V, center, radius, variables=None, budget=48, seed=None, config=None, gap=0.2):
    """Randomized frame and dyadic-shrink search for a verified polydisc."""
    config = config or DEFAULT
    V = as_set(V, variables, config)
    if not (V.is_algebraic and len(V.functions) == 1):
        raise PreconditionError("algebraic_polydisc handles algebraic hypersurfaces")
    center = np.asarray(center, dtype=complex)
    n = len(center)
    rng = np.random.default_rng(config.seed if seed is None else seed)
    frames = [np.eye(n, dtype=complex)[:, list(range(n))[::-1] if k else list(range(n))] for k in range(2)]
    best = None
    for attempt in range(budget):
        Q = frames[attempt] if attempt < len(frames) else unitary_group.rvs(n, random_state=rng)
        Q = np.atleast_2d(Q)
        u = Q[:, -1]
        roots = _poly_roots(V.restricted_coefficients(center, u))
        dist = np.abs(roots)
        for j in range(1, 7):
            rw = radius / 2 ** j
            if dist.size and np.min(np.abs(dist - rw)) < gap * rw:
                continue
            for s in range(0, 10):
                rz = rw / 2 ** s
                if math.sqrt((n - 1) * rz ** 2 + rw ** 2) > radius:
                    continue
                P = WeierstrassPolydisc(center, Q, np.zeros(n - 1), np.full(n - 1, rz), np.zeros(1), [rw])
                check = verify_polydisc(V, P)
                if not check["ok"]:
                    best = max(best or 0.0, check["margin"])
                    continue
                deg = degree(V, P)
                if not deg["constant"]:
                    continue
                P.degree, P.margin = deg["degree"], check["margin"]
                P.notes = {"eta": radius / P.contains_ball(), "attempts": attempt + 1, "fiber_counts": deg["counts"]}
                return P
            break
    raise PreconditionError("search budget exhausted without a verified polydisc", {"best_margin": best})


__all__ = ["AnalyticSet", "algebraic_variety", "as_set", "WeierstrassPolydisc", "verify_polydisc", "degree",
           "fiber_count", "hypersurface_polydisc", "analytic_resultant", "resultant_function",
           "intersect_polydisc", "algebraic_polydisc"]
