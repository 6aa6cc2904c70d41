"""Closure operations on Noetherian functions.

Each operation builds a new chain and reports parameters by the
standard bookkeeping formulas:

========================  ===============================================
union                     (n, l1+l2, max(a1, a2))
derivative                degree max(0, b+a-1)
add / mul                 degree max(b1, b2) / b1+b2
invert                    (n, l+1, a+b+1), result degree 1
compose                   (n1, l1+l2, max(a1+b1, a2)), result degree b2
========================  ===============================================

When a formula undercounts the degree of the chain actually built, the
chain keeps the formula value in ``alpha`` and records the true value
under ``notes["actual_alpha"]``.
"""

from __future__ import annotations

import numpy as np

from .chain import NoetherianChain, NoetherianFunction, member_names
from .config import DEFAULT
from .errors import PreconditionError
from .evaluate import Evaluator
from .poly import ComplexBox, Polynomial, coeff


def _same_frame(c1, c2, tol=1e-12):
    return (c1.xvars == c2.xvars and c1.domain == c2.domain
            and np.allclose(c1.basepoint, c2.basepoint, atol=tol, rtol=0))


def _note_alpha(notes, reported, actual):
    notes = dict(notes)
    if actual > reported:
        notes["actual_alpha"] = actual
    else:
        notes.pop("actual_alpha", None)
    return notes


def rename_members(poly, offset, ell):
    """Shift member names y1..yl to y(offset+1)..y(offset+l)."""
    if offset == 0:
        return poly
    return poly.rename({f"y{k}": f"y{k + offset}" for k in range(ell, 0, -1)})


def union(c1, c2):
    """Concatenate two chains on the same domain and basepoint.

    Returns ``(chain, lift1, lift2)`` where ``lift_k`` maps a function
    over ``c_k`` to one over the union.
    """
    if c1.n != c2.n or c1.xvars != c2.xvars:
        raise PreconditionError("union needs identical coordinates", {"left": c1.xvars, "right": c2.xvars})
    if not _same_frame(c1, c2):
        raise PreconditionError("union needs identical domain and basepoint",
                                {"left": [c1.domain.to_dict(), c1.basepoint], "right": [c2.domain.to_dict(), c2.basepoint]})
    off = c1.ell
    rows = [list(r) for r in c1.rhs]
    rows += [[rename_members(p, off, c2.ell) for p in row] for row in c2.rhs]
    alpha = max(c1.alpha, c2.alpha)
    chain = NoetherianChain(c1.xvars, rows, c1.domain, c1.basepoint,
                            c1.initial_values + c2.initial_values, alpha=alpha,
                            notes=_note_alpha({}, alpha, max(c1.notes.get("actual_alpha", 0), c2.notes.get("actual_alpha", 0))))

    def lift1(f):
        return NoetherianFunction(chain, f.poly, f.beta)

    def lift2(f):
        return NoetherianFunction(chain, rename_members(f.poly, off, c2.ell), f.beta)

    return chain, lift1, lift2


def union_functions(f, g):
    """Bring two functions onto a common chain (no-op when they share one)."""
    if f.chain is g.chain:
        return f, g
    chain, l1, l2 = union(f.chain, g.chain)
    return l1(f), l2(g)


def derivative(f, j):
    """Partial derivative in coordinate ``j`` (index or name)."""
    c = f.chain
    if isinstance(j, str):
        if j not in c.xvars:
            raise PreconditionError(f"unknown coordinate {j!r}", {"coordinates": c.xvars})
        j = c.xvars.index(j)
    if not 0 <= j < c.n:
        raise PreconditionError(f"coordinate index {j} out of range", {"n": c.n})
    return NoetherianFunction(c, c.lie(f.poly, j), max(0, f.beta + c.alpha - 1))


def combine(f, g, op):
    """``op`` is ``add``, ``sub`` or ``mul``; both functions must share a chain."""
    if f.chain is not g.chain and not f.chain.same_as(g.chain):
        raise PreconditionError("combine needs a common chain; take the union first")
    if op == "add":
        return NoetherianFunction(f.chain, f.poly + g.poly, max(f.beta, g.beta))
    if op == "sub":
        return NoetherianFunction(f.chain, f.poly - g.poly, max(f.beta, g.beta))
    if op == "mul":
        return NoetherianFunction(f.chain, f.poly * g.poly, f.beta + g.beta)
    raise ValueError(f"unknown op {op!r}")


def scale(f, c):
    return NoetherianFunction(f.chain, f.poly * coeff(c), f.beta)


def sample_function(f, level=None, config=None, evaluator=None):
    """Values of ``f`` on the nested domain grid: (points, values)."""
    config = config or DEFAULT
    c = f.chain
    pts = c.domain.grid(config.domain_grid_level if level is None else level)
    if c.ell:
        ev = evaluator or Evaluator(c, config)
        vals = ev.values_along(pts)
    else:
        vals = np.zeros((len(pts), 0), dtype=complex)
    return pts, f.numeric()(np.concatenate([pts, vals], axis=1))


def invert(f, eps=None, assume=False, config=None, level=None):
    """``1/f`` as a new chain member.

    The lower bound ``|f| >= eps`` on the domain is certified by
    sampling unless ``assume`` is set.  With ``eps=None`` the bound is
    half the sampled minimum.
    """
    c = f.chain
    report = {"eps": eps, "assumed": bool(assume)}
    if not assume:
        pts, vals = sample_function(f, level, config)
        mags = np.abs(vals)
        k = int(np.argmin(mags))
        report["sampled_min"] = float(mags[k])
        if eps is None:
            eps = mags[k] / 2
            report["eps"] = float(eps)
        # boundary equality is allowed up to sampling round-off
        if not mags[k] >= eps * (1 - 1e-12) or mags[k] == 0:
            raise PreconditionError("function comes closer to zero than eps on the domain",
                                    {"point": pts[k].tolist(), "value": complex(vals[k]), "eps": eps})
    v0 = complex(f.value_at_basepoint())
    if v0 == 0:
        raise PreconditionError("function vanishes at the basepoint", {"point": list(c.basepoint)})
    g = f"y{c.ell + 1}"
    G = Polynomial.var(g)
    rows = [list(r) for r in c.rhs]
    rows.append([-(G * G) * c.lie(f.poly, j) for j in range(c.n)])
    alpha = c.alpha + f.beta + 1
    chain = NoetherianChain(c.xvars, rows, c.domain, c.basepoint, c.initial_values + (1 / v0,),
                            alpha=alpha, notes=_note_alpha(c.notes, alpha, max(p.degree() for r in rows for p in r)))
    out = NoetherianFunction(chain, G, 1)
    out.report = report
    return out


def compose(fs, g, config=None, check_image=False):
    """``g o (f_1, ..., f_n2)`` where the ``f_k`` share one chain.

    The members of ``g``'s chain are pulled back and appended.  Initial
    values come from continuing ``g``'s chain to ``f(basepoint)``.
    """
    fs = list(fs)
    c1 = fs[0].chain
    for f in fs[1:]:
        if f.chain is not c1 and not f.chain.same_as(c1):
            raise PreconditionError("compose needs the inner functions on one chain")
    c2 = g.chain
    if len(fs) != c2.n:
        raise PreconditionError(f"outer function takes {c2.n} arguments, got {len(fs)}")
    image0 = np.array([complex(f.value_at_basepoint()) for f in fs])
    if not c2.domain.contains(image0):
        raise PreconditionError("image of the basepoint lies outside the outer domain", {"image": image0.tolist()})
    if check_image:
        for f_idx, f in enumerate(fs):
            pts, vals = sample_function(f, 1, config)
            box = ComplexBox([c2.domain.centers[f_idx]], [c2.domain.radii[f_idx]])
            bad = [k for k, v in enumerate(vals) if not box.contains([v])]
            if bad:
                raise PreconditionError("image leaves the outer domain",
                                        {"point": pts[bad[0]].tolist(), "value": complex(vals[bad[0]])})
    off = c1.ell
    sub = {x2: f.poly for x2, f in zip(c2.xvars, fs)}

    def pull(p):
        return rename_members(p, off, c2.ell).subs(sub)

    dF = [[c1.lie(f.poly, j) for j in range(c1.n)] for f in fs]
    rows = [list(r) for r in c1.rhs]
    for i in range(c2.ell):
        pulled = [pull(c2.rhs[i][k]) for k in range(c2.n)]
        rows.append([sum((pulled[k] * dF[k][j] for k in range(c2.n)), Polynomial.zero()) for j in range(c1.n)])
    if c2.ell:
        vals2 = Evaluator(c2, config).values_at(image0)
    else:
        vals2 = np.zeros(0)
    beta1 = max(f.beta for f in fs)
    alpha = max(c1.alpha + beta1, c2.alpha)
    actual = max((p.degree() for r in rows for p in r), default=0)
    chain = NoetherianChain(c1.xvars, rows, c1.domain, c1.basepoint,
                            c1.initial_values + tuple(complex(v) for v in vals2),
                            alpha=alpha, notes=_note_alpha(c1.notes, alpha, actual))
    return NoetherianFunction(chain, pull(g.poly), g.beta)


def determinant(M):
    """Symbolic determinant by cofactor expansion (small n)."""
    n = len(M)
    if n == 0:
        return Polynomial.const(1)
    if n == 1:
        return M[0][0]
    out = Polynomial.zero()
    for k in range(n):
        if M[0][k].is_zero():
            continue
        minor = [row[:k] + row[k + 1:] for row in M[1:]]
        term = M[0][k] * determinant(minor)
        out = out + term if k % 2 == 0 else out - term
    return out


def adjugate(M):
    n = len(M)
    if n == 1:
        return [[Polynomial.const(1)]]
    adj = [[None] * n for _ in range(n)]
    for r in range(n):
        for k in range(n):
            minor = [row[:k] + row[k + 1:] for i, row in enumerate(M) if i != r]
            d = determinant(minor)
            adj[k][r] = d if (r + k) % 2 == 0 else -d
    return adj


def compositional_inverse(fs, target_vars=None, target_domain=None, config=None):
    """Local inverse of ``F = (f_1..f_n)`` near the basepoint.

    Builds the chain of ``(x, phi, 1/det J) o F^{-1}`` on the image
    space, with the coordinates ``x o F^{-1}`` as the first members.
    Returns ``(chain, [x_1 o F^{-1}, ...])``.
    """
    fs = list(fs)
    c = fs[0].chain
    n = c.n
    if len(fs) != n:
        raise PreconditionError("compositional inverse needs n functions of n variables")
    for f in fs[1:]:
        if f.chain is not c and not f.chain.same_as(c):
            raise PreconditionError("all components must share one chain")
    uvars = tuple(target_vars or [f"u{k + 1}" for k in range(n)])
    # members of the new chain: X_1..X_n, Phi_1..Phi_l, D
    X = member_names(n)
    Phi = member_names(c.ell, n + 1)
    D = Polynomial.var(f"y{n + c.ell + 1}")
    sub = {v: Polynomial.var(nm) for v, nm in zip(c.xvars + c.members, X + Phi)}

    def pull(p):
        # rename simultaneously through temporary names to avoid clashes
        tmp = {v: f"tmp_{k}" for k, v in enumerate(c.xvars + c.members)}
        q = p.with_variables(set(p.variables) | set(tmp)).rename(tmp)
        return q.subs({tmp[v]: s for v, s in sub.items()})

    J = [[c.lie(f.poly, j) for j in range(n)] for f in fs]
    det = determinant(J)
    Jt = [[pull(p) for p in row] for row in J]
    adj = adjugate(Jt)
    ddet = [pull(c.lie(det, j)) for j in range(n)]
    rows = []
    for j in range(n):
        rows.append([D * adj[j][k] for k in range(n)])
    for i in range(c.ell):
        rows.append([D * sum((pull(c.rhs[i][j]) * adj[j][k] for j in range(n)), Polynomial.zero())
                     for k in range(n)])
    rows.append([-(D ** 3) * sum((ddet[j] * adj[j][k] for j in range(n)), Polynomial.zero()) for k in range(n)])
    x0 = np.array(c.basepoint)
    full0 = np.concatenate([x0, np.array(c.initial_values)])
    det0 = complex(det.numeric(c.all_variables)(full0))
    if abs(det0) < 1e-14:
        raise PreconditionError("Jacobian is singular at the basepoint", {"point": x0.tolist(), "det": det0})
    u0 = np.array([complex(f.value_at_basepoint()) for f in fs])
    if target_domain is None:
        target_domain = _image_domain(fs, u0, config)
    chain = NoetherianChain(uvars, rows, target_domain, u0,
                            tuple(x0) + c.initial_values + (1 / det0,))
    chain.notes["inverse_of"] = {"n": n, "ell": c.ell, "added_members": n + 1}
    return chain, [chain.member(k) for k in range(n)]


def _image_domain(fs, u0, config):
    """Polydisc around F(basepoint) inside the sampled image of the boundary."""
    c = fs[0].chain
    dom = c.domain
    ev = Evaluator(c, config) if c.ell else None
    radii = []
    pts = []
    for j in range(c.n):
        for th in np.linspace(0, 2 * np.pi, 65)[:-1]:
            p = np.array(c.basepoint, dtype=complex)
            p[j] = dom.centers[j] + dom.radii[j] * np.exp(1j * th)
            pts.append(p)
    pts = np.array(pts)
    vals = ev.values_along(pts) if ev else np.zeros((len(pts), 0))
    full = np.concatenate([pts, vals], axis=1)
    img = np.stack([f.numeric()(full) for f in fs], axis=1)
    dist = float(np.min(np.linalg.norm(img - u0, axis=1)))
    r = 0.9 * dist / np.sqrt(c.n)
    radii = [r] * c.n
    return ComplexBox(u0, radii)


def implicit(fs, ynames, x_domain, point, config=None, newton_steps=8):
    """Solve ``F(x, y) = 0`` for ``y = G(x)`` near ``point = (x0, y0)``.

    ``fs`` are m functions on a chain whose coordinates are the x's
    followed by ``ynames``.  Returns ``(chain, [G_1..G_m])`` over a chain
    on ``x_domain``.
    """
    fs = list(fs)
    c = fs[0].chain
    ynames = tuple(ynames)
    xnames = tuple(v for v in c.xvars if v not in ynames)
    m = len(ynames)
    if len(fs) != m or len(xnames) + m != c.n:
        raise PreconditionError("implicit needs as many equations as unknowns")
    point = np.array(point, dtype=complex)
    # reorder so that coordinates are (x..., y...) as given by xvars order
    order = [c.xvars.index(v) for v in xnames + ynames]
    if order != list(range(c.n)):
        raise PreconditionError("chain coordinates must list x's first, then y's", {"xvars": c.xvars})
    base = _rebase_to(c, point, config)
    fs = [NoetherianFunction(base, f.poly, f.beta) for f in fs]
    resid = np.array([complex(f.value_at_basepoint()) for f in fs])
    if np.max(np.abs(resid)) > 1e-8:
        raise PreconditionError("point is not on the zero set", {"point": point.tolist(), "residual": resid.tolist()})
    coords = [base.coordinate(k) for k in range(len(xnames))]
    target = xnames + tuple(f"v{k + 1}" for k in range(m))
    H = coords + fs
    big_domain = ComplexBox(list(x_domain.centers) + [0j] * m,
                            list(x_domain.radii) + [1e-3] * m)
    inv, comps = compositional_inverse(H, target, big_domain, config)
    nx = len(xnames)
    zero = {f"v{k + 1}": 0 for k in range(m)}
    rows = [[p.subs(zero) for p in row[:nx]] for row in inv.rhs]
    u0 = tuple(point[:nx])
    chain = NoetherianChain(xnames, rows, x_domain, u0, inv.initial_values)
    return chain, [chain.member(nx + k) for k in range(m)]


def _rebase_to(c, point, config):
    if np.allclose(point, c.basepoint, atol=1e-15, rtol=0):
        return c
    return rebase(c, point, c.domain, config=config)


def rebase(chain, basepoint, domain=None, path=None, config=None, enforce_domain=True):
    """Same chain with a new basepoint (and domain) reached by continuation."""
    ev = Evaluator(chain, config, enforce_domain)
    path = list(path or []) + [np.asarray(basepoint, dtype=complex)]
    vals = ev.continue_along(path).values if chain.ell else ()
    return chain.replace(basepoint=basepoint, domain=domain or chain.domain, initial_values=tuple(vals))


def lift_coordinates(chain, xvars, domain, basepoint):
    """Embed a chain into more coordinates on which it does not depend."""
    xvars = tuple(xvars)
    missing = [v for v in chain.xvars if v not in xvars]
    if missing:
        raise PreconditionError(f"coordinates {missing} not in the target list")
    idx = {v: k for k, v in enumerate(chain.xvars)}
    rows = [[row[idx[v]] if v in idx else Polynomial.zero() for v in xvars] for row in chain.rhs]
    return NoetherianChain(xvars, rows, domain, basepoint, chain.initial_values,
                           alpha=chain.alpha, notes=chain.notes)


def depolarize(system, eps=None, config=None, level=1):
    """Polynomial chain from a rational one via ``rho = 1/R`` members.

    One member is added per distinct (up to a constant) denominator,
    with ``d rho = -rho^2 dR``.  When ``eps`` is given the sampled
    minimum of ``|R|`` over the domain must reach it.
    """
    n, ell = system.n, system.ell
    dens = system.denominators()
    rho_names = member_names(len(dens), ell + 1)
    rho = [Polynomial.var(nm) for nm in rho_names]

    def lookup(r):
        for k, s in enumerate(dens):
            a, b = r.trimmed(), s.trimmed()
            if a.variables == b.variables and set(a.terms) == set(b.terms):
                e0 = next(iter(a.terms))
                ratio = a.terms[e0] / b.terms[e0]
                if all(a.terms[e] == ratio * b.terms[e] for e in a.terms):
                    return k, ratio
        raise AssertionError("denominator not registered")

    rows = []
    for row in system.rhs:
        new_row = []
        for entry in row:
            acc = Polynomial.zero()
            for q, r in entry:
                if r.is_constant():
                    acc = acc + q / r.constant_term()
                else:
                    k, ratio = lookup(r)
                    acc = acc + q * rho[k] * (1 / ratio)
            new_row.append(acc)
        rows.append(new_row)
    names = system.xvars + member_names(ell + len(dens))
    for k, r in enumerate(dens):
        r = r.with_variables(set(r.variables) | set(names))
        new_row = []
        for j, x in enumerate(system.xvars):
            d = r.diff(x)
            for i, m in enumerate(member_names(ell)):
                dm = r.diff(m)
                if not dm.is_zero():
                    d = d + dm * rows[i][j]
            new_row.append(-(rho[k] * rho[k]) * d)
        rows.append(new_row)
    full0 = np.concatenate([np.array(system.basepoint), np.array(system.initial_values)])
    init = list(system.initial_values)
    for r in dens:
        val = complex(r.numeric(system.xvars + member_names(ell))(full0))
        if val == 0:
            raise PreconditionError("denominator vanishes at the basepoint", {"denominator": r.to_text()})
        init.append(1 / val)
    chain = NoetherianChain(system.xvars, rows, system.domain, system.basepoint, init)
    report = {"denominators": [r.to_text() for r in dens], "added_members": len(dens)}
    if eps is not None:
        fs = [NoetherianFunction(chain, r) for r in dens]
        for r, f in zip(dens, fs):
            pts, vals = sample_function(f, level, config)
            k = int(np.argmin(np.abs(vals)))
            if abs(vals[k]) < eps:
                raise PreconditionError("denominator smaller than eps on the domain",
                                        {"denominator": r.to_text(), "point": pts[k].tolist(), "value": complex(vals[k])})
        report["eps"] = eps
    chain.notes["depolarized"] = report
    return chain, report



def extend_domain(chain, config=None, max_halvings=12):
    """Inflate the domain by ``NS**(-kappa)`` keeping the size at most doubled."""
    from .chain import noetherian_size

    config = config or DEFAULT
    ns = noetherian_size(chain, config=config)["NS"]
    rho = ns ** (-config.kappa)
    for _ in range(max_halvings):
        bigger = chain.replace(domain=chain.domain.inflate(rho))
        ns2 = noetherian_size(bigger, config=config)["NS"]
        if ns2 <= 2 * ns:
            return bigger, {"rho": rho, "NS": ns, "NS_extended": ns2, "target_rho": ns ** (-config.kappa)}
        rho /= 2
    raise PreconditionError("could not extend the domain while keeping the size doubled", {"NS": ns})


def sequence_params(op, *params, **extra):
    """Bookkeeping formula for ``op`` given input parameter tuples."""
    if op == "union":
        (n, l1, a1), (_, l2, a2) = params
        return (n, l1 + l2, max(a1, a2))
    if op == "derivative":
        (n, l, a, b), = params
        return (n, l, a, max(0, b + a - 1))
    if op in ("add", "sub"):
        (n, l, a, b1), (_, _, _, b2) = params
        return (n, l, a, max(b1, b2))
    if op == "mul":
        (n, l, a, b1), (_, _, _, b2) = params
        return (n, l, a, b1 + b2)
    if op == "invert":
        (n, l, a, b), = params
        return (n, l + 1, a + b + 1, 1)
    if op == "compose":
        (n1, l1, a1, b1), (_, l2, a2, b2) = params
        return (n1, l1 + l2, max(a1 + b1, a2), b2)
    raise ValueError(op)


__all__ = ["union", "union_functions", "derivative", "combine", "scale", "invert", "compose",
           "compositional_inverse", "implicit", "depolarize", "extend_domain", "rebase",
           "lift_coordinates", "sequence_params"]
