"""Bernstein indices, argument-principle zero counts and the inequality checks.

The index of ``f`` for discs ``K`` inside ``U`` is ``ln(M_U / M_K)``
with ``M_A`` the maximum modulus on ``A``; by the maximum principle the
maxima are taken on boundary circles.  With a gap ``eta`` the inner
disc is ``U`` with its radius divided by ``eta``.

Everything that takes a function accepts

* a NoetherianFunction (restricted to the disc's complex line),
* a one-variable Polynomial,
* a vectorized callable ``t -> f(t)`` on complex arrays, or, for discs
  inside a line, ``points -> f(points)`` on arrays of shape (..., n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .chain import NoetherianFunction
from .config import DEFAULT
from .errors import PreconditionError
from .evaluate import Evaluator, max_on_circle
from .poly import Polynomial

NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class Disc:
    """Disc ``|t - center| <= radius``; with ``line = (origin, direction)``
    the parameter ``t`` names the point ``origin + t*direction`` of C^n."""

    center: complex
    radius: float
    line: tuple = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    def shrink(self, eta):
        return Disc(self.center, self.radius / eta, self.line)

    def scaled(self, factor):
        return Disc(self.center, self.radius * factor, self.line)

    def contains_disc(self, other, tol=1e-12):
        return abs(other.center - self.center) + other.radius <= self.radius * (1 + tol)

    def boundary(self, m):
        theta = 2 * np.pi * np.arange(m) / m
        return self.center + self.radius * np.exp(1j * theta)


def restrict(f, disc, config=None):
    """Vectorized ``t -> f`` on the disc's parameter plane."""
    config = config or DEFAULT
    if isinstance(f, NoetherianFunction):
        chain = f.chain
        if disc.line is None:
            if chain.n != 1:
                raise PreconditionError("a disc in C^n needs a line for an n-variable function")
            origin, direction = np.zeros(1, dtype=complex), np.ones(1, dtype=complex)
        else:
            origin, direction = (np.asarray(v, dtype=complex) for v in disc.line)
        if chain.ell == 0:
            num = f.numeric()

            def g0(t):
                t = np.asarray(t, dtype=complex)
                return num(origin + t[..., None] * direction)

            return g0
        # anchor the sampler at the disc center
        sampler = Evaluator(chain, config).line(origin + disc.center * direction, direction)
        scale = np.linalg.norm(direction)
        h = sampler.function(f)
        return lambda t: h((np.asarray(t, dtype=complex) - disc.center) * scale)
    if isinstance(f, Polynomial):
        used = tuple(f.used_variables())
        if not used:
            c = complex(f.constant_term())
            return lambda t: np.full(np.shape(t), c, dtype=complex)
        if disc.line is not None:
            # line coordinates follow the polynomial's (sorted) variables
            num = f.numeric()
            origin, direction = (np.asarray(v, dtype=complex) for v in disc.line)
            return lambda t: num(origin + np.asarray(t, dtype=complex)[..., None] * direction)
        if len(used) > 1:
            raise PreconditionError("a disc in C^n needs a line for a multivariate polynomial")
        num = f.numeric(used)
        return lambda t: num(np.asarray(t, dtype=complex)[..., None])
    if callable(f):
        if disc.line is None:
            return f
        origin, direction = (np.asarray(v, dtype=complex) for v in disc.line)
        return lambda t: f(origin + np.asarray(t, dtype=complex)[..., None] * direction)
    raise TypeError(f"cannot evaluate {type(f).__name__}")


@dataclass
class BernsteinReport:
    index: float
    M_U: float
    M_K: float
    witness_U: complex
    witness_K: complex
    gap: float
    uncertainty: float
    samples: int
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"index": self.index, "M_U": self.M_U, "M_K": self.M_K,
                "witness_U": [self.witness_U.real, self.witness_U.imag],
                "witness_K": [self.witness_K.real, self.witness_K.imag],
                "gap": self.gap, "uncertainty": self.uncertainty, "samples": self.samples, **self.extra}


def _index_from(g, U, K, samples, config):
    mu = max_on_circle(g, U.radius, U.center, samples, config=config)
    mk = max_on_circle(g, K.radius, K.center, samples, config=config)
    if not mu["max"] > 1e-300 or not mk["max"] > 1e-300 or mk["max"] < NOISE_FLOOR * mu["max"]:
        raise PreconditionError("index undefined: function numerically vanishes",
                                {"M_U": mu["max"], "M_K": mk["max"]})
    idx = math.log(mu["max"] / mk["max"])
    unc = mu["uncertainty"] / mu["max"] + mk["uncertainty"] / mk["max"]
    return idx, mu, mk, unc


def bernstein_index(f, U, K=None, gap=2.0, samples=None, config=None, g=None):
    """Index ``ln(M_U/M_K)``; ``K`` defaults to ``U`` shrunk by ``gap``."""
    config = config or DEFAULT
    if K is None:
        K = U.shrink(gap)
        eta = float(gap)
    else:
        eta = U.radius / K.radius
    if not U.contains_disc(K):
        raise PreconditionError("inner disc is not contained in the outer disc",
                                {"U": [U.center, U.radius], "K": [K.center, K.radius]})
    g = g or restrict(f, U, config)
    idx, mu, mk, unc = _index_from(g, U, K, samples, config)
    return BernsteinReport(idx, mu["max"], mk["max"], complex(mu["witness"]), complex(mk["witness"]),
                           eta, unc, mu["samples"])


def winding_number(g, center, radius, samples=128, max_rounds=40, floor=NOISE_FLOOR):
    """Winding of ``g`` around 0 along the circle, refining until every
    angular increment is below pi/2.  Returns (winding, min modulus)."""
    theta = 2 * np.pi * np.arange(samples + 1) / samples
    vals = np.asarray(g(center + radius * np.exp(1j * theta)), dtype=complex)
    vals[-1] = vals[0]
    for _ in range(max_rounds):
        mags = np.abs(vals)
        scale = float(np.max(mags))
        k = int(np.argmin(mags))
        if not (mags[k] > 1e-300 and mags[k] >= floor * scale):
            raise PreconditionError("function modulus on the circle is below the noise floor",
                                    {"point": complex(center + radius * np.exp(1j * theta[k])), "modulus": float(mags[k])})
        steps = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(np.abs(steps) >= np.pi / 2)[0]
        if not bad.size:
            w = float(np.sum(steps)) / (2 * np.pi)
            n = int(round(w))
            if abs(w - n) > 1e-6:
                raise PreconditionError("argument increments do not close up", {"winding": w})
            return n, float(mags[k])
        mids = (theta[bad] + theta[bad + 1]) / 2
        new = np.asarray(g(center + radius * np.exp(1j * mids)), dtype=complex)
        theta = np.insert(theta, bad + 1, mids)
        vals = np.insert(vals, bad + 1, new)
    raise PreconditionError("argument tracking did not resolve", {"samples": len(theta)})


def count_zeros_disc(f, D, samples=None, config=None, g=None, floor=NOISE_FLOOR):
    """Number of zeros (with multiplicity) inside ``D`` by the argument principle."""
    config = config or DEFAULT
    g = g or restrict(f, D, config)
    n, _ = winding_number(g, D.center, D.radius, samples or max(128, config.circle_samples), floor=floor)
    return n


def count_zeros_perturbed(f, D, config=None, g=None, tries=8, step=1e-4):
    """Zero count on ``D`` or, if its boundary hits a zero, on a slightly larger disc.

    The count is never smaller than the true count on ``D``.
    """
    g = g or restrict(f, D, config)
    for k in range(tries):
        R = D.scaled(1 + step * k * (k + 1) / 2) if k else D
        try:
            return count_zeros_disc(f, R, config=config, g=g), R.radius
        except PreconditionError:
            continue
    raise PreconditionError("no zero-free boundary found near the disc", {"radius": D.radius})


def _report(holds, **kw):
    return {"holds": bool(holds), **kw}


def check_zero_bound(f, U, eps, gamma_cal=None, config=None):
    """``#zeros(U^{1+eps}) <= (2/eps^2 + gamma_cal*eps) * index_U^{1+eps}(f)``."""
    config = config or DEFAULT
    gamma_cal = config.gamma_cal if gamma_cal is None else gamma_cal
    g = restrict(f, U, config)
    K = U.shrink(1 + eps)
    rep = bernstein_index(f, U, K, config=config, g=g)
    zeros, radius = count_zeros_perturbed(f, K, config, g)
    gamma = 2 / eps ** 2 + gamma_cal * eps
    bound = gamma * rep.index
    tol = 1e-9 * max(1.0, bound) + gamma * rep.uncertainty
    return _report(zeros <= bound + tol, zeros=zeros, bound=bound, gamma=gamma, index=rep.index,
                   slack=bound - zeros, eps=eps, gamma_cal=gamma_cal, count_radius=radius,
                   constants=config.constants())


def min_on_circle(g, radius, center=0j, samples=256):
    theta = 2 * np.pi * np.arange(samples) / samples
    v = np.abs(g(center + radius * np.exp(1j * theta)))
    k = int(np.argmin(v))
    fine = np.linspace(theta[k] - 2 * np.pi / samples, theta[k] + 2 * np.pi / samples, 33)
    vf = np.abs(g(center + radius * np.exp(1j * fine)))
    j = int(np.argmin(vf))
    if vf[j] < v[k]:
        return float(vf[j]), float(fine[j])
    return float(v[k]), float(theta[k])


def low_value_disc(f, U, radii=33, config=None):
    """Concentric disc with radius in [r/4, r/2] maximizing the boundary minimum.

    Returns ``(disc, m, report)``; the report compares ``m`` with
    ``exp(-c_cal * index_U^2(f)) * M_U(f)``.
    """
    config = config or DEFAULT
    g = restrict(f, U, config)
    rep = bernstein_index(f, U, gap=2, config=config, g=g)
    best = None
    for r in np.linspace(U.radius / 4, U.radius / 2, radii):
        m, th = min_on_circle(g, float(r), U.center, config.circle_samples)
        if best is None or m > best[0]:
            best = (m, float(r), th)
    m, r, th = best
    if not m > NOISE_FLOOR * rep.M_U:
        raise PreconditionError("every scanned circle passes through a zero", {"M_U": rep.M_U})
    bound = math.exp(-config.c_cal * rep.index) * rep.M_U
    holds = m >= bound * (1 - 1e-9)
    report = _report(holds, m=m, radius=r, bound=bound, index=rep.index, M_U=rep.M_U,
                     slack=math.log(m) - math.log(bound), c_cal=config.c_cal,
                     witness=complex(U.center + r * np.exp(1j * th)))
    return Disc(U.center, r, U.line), m, report


def gap_conversion_check(f, U, eps, config=None):
    """``index_U^2 <= (chi_eps + tau_eps ln 2) * index_U^{1+eps}``."""
    config = config or DEFAULT
    g = restrict(f, U, config)
    b2 = bernstein_index(f, U, gap=2, config=config, g=g)
    be = bernstein_index(f, U, gap=1 + eps, config=config, g=g)
    chi = 8 / eps ** 4 * math.log(1 / eps) + config.chi_cal / eps ** 4
    tau = 2 / eps ** 2 + config.tau_cal * eps
    rhs = (chi + tau * math.log(2)) * be.index
    tol = 1e-9 + b2.uncertainty + (chi + tau) * be.uncertainty
    return _report(b2.index <= rhs + tol, lhs=b2.index, rhs=rhs, chi=chi, tau=tau, slack=rhs - b2.index,
                   eps=eps, constants=config.constants())


def subadditivity_factor(n, config=None):
    config = config or DEFAULT
    return config.subadd_cal * max(1.0, math.log(n + 1))


def subadditivity_check(fs, U, config=None):
    """``index_U^2(prod f_j) <= subadd_cal * max(1, ln(n+1)) * sum index_U^2(f_j)``."""
    config = config or DEFAULT
    gs = [restrict(f, U, config) for f in fs]
    parts = [bernstein_index(f, U, gap=2, config=config, g=g) for f, g in zip(fs, gs)]

    def prod(t):
        out = np.ones(np.shape(t), dtype=complex)
        for g in gs:
            out = out * g(t)
        return out

    whole = bernstein_index(None, U, gap=2, config=config, g=prod)
    n = len(fs)
    factor = subadditivity_factor(n, config)
    total = sum(p.index for p in parts)
    rhs = factor * total
    tol = 1e-9 + whole.uncertainty + factor * sum(p.uncertainty for p in parts)
    return _report(whole.index <= rhs + tol, lhs=whole.index, rhs=rhs, sum=total, factor=factor,
                   parts=[p.index for p in parts], additive_gap=total - whole.index, slack=rhs - whole.index)


def sphere_directions(n, count, seed=0):
    """Quasi-random unit vectors in C^n (scrambled Halton, Gaussian transform)."""
    if n == 1:
        return np.ones((max(count, 1), 1), dtype=complex)[:1]
    from scipy.stats import norm

    sampler = qmc.Halton(d=2 * n, scramble=True, seed=seed)
    u = np.clip(sampler.random(count), 1e-12, 1 - 1e-12)
    z = norm.ppf(u)
    v = z[:, :n] + 1j * z[:, n:]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def directional_bernstein(F, center, radius, gap=2.0, line_samples=32, config=None, seed=None):
    """Sampled lower bound for the ball index: max over lines through ``center``."""
    config = config or DEFAULT
    center = np.asarray(center, dtype=complex)
    dirs = sphere_directions(len(center), line_samples, config.seed if seed is None else seed)
    extra = np.eye(len(center), dtype=complex)
    best, skipped, used = None, 0, 0
    for d in np.concatenate([extra, dirs]):
        disc = Disc(0j, radius, (center, d))
        try:
            rep = bernstein_index(F, disc, gap=gap, config=config)
        except PreconditionError:
            skipped += 1
            continue
        used += 1
        if best is None or rep.index > best.index:
            best = rep
            best.extra = {"direction": [[z.real, z.imag] for z in d]}
    if best is None:
        raise PreconditionError("every sampled line restriction vanishes identically", {"lines": skipped})
    best.extra.update({"lines": used, "skipped": skipped, "lower_bound": True})
    return best


__all__ = ["Disc", "BernsteinReport", "restrict", "bernstein_index", "count_zeros_disc", "count_zeros_perturbed",
           "winding_number", "check_zero_bound", "low_value_disc", "gap_conversion_check", "subadditivity_check",
           "directional_bernstein", "sphere_directions", "min_on_circle"]
