"""A small expression language compiled into Noetherian functions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' nat)?
    atom   := rational | ident | ident '(' args ')' | '(' expr ')'

A rational literal is written without spaces (``3``, ``1/2``, ``0.25``);
``1 / 2`` with spaces is a division.  ``i`` is the imaginary unit.
Besides the catalog builtins there are two special forms:
``diff(e, x)`` (partial derivative) and ``inv(e, eps)`` (reciprocal
with an explicit lower bound ``eps`` for ``|e|``).

Program files hold one declaration per line::

    let f = exp(x) * sin(x) on domain(x: 0, 1) at basepoint(x: 0)
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import closure
from .catalog import CATALOG, FUNCTIONS, catalog_builtin
from .chain import NoetherianChain, NoetherianFunction
from .config import DEFAULT
from .errors import NoetherianError, PreconditionError
from .poly import ComplexBox, GaussianRational, Polynomial, coeff, format_coeff

SPECIAL_FORMS = ("diff", "inv")


class DSLSyntaxError(NoetherianError):
    kind = "syntax"

    def __init__(self, message, text, pos):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} (line {line}, column {col})", {"line": line, "column": col})
        self.line, self.column = line, col


class CompileError(PreconditionError):
    kind = "compile"


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Lit:
    value: object                       # Fraction or GaussianRational
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    arg: object
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str                             # one of + - * /
    left: object
    right: object
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    """Builtin call; a call on anything but distinct coordinates is a composition."""

    name: str
    args: tuple
    span: tuple = field(default=(0, 0), compare=False)

    @property
    def is_compose(self):
        return not (all(isinstance(a, Var) for a in self.args)
                    and len({a.name for a in self.args}) == len(self.args))


@dataclass(frozen=True)
class Derive:
    arg: object
    var: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class InvertOn:
    arg: object
    eps: Fraction
    span: tuple = field(default=(0, 0), compare=False)


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<sym>[-+*/^(),:;=])
""", re.VERBOSE)


def tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos] == "#":
            nl = text.find("\n", pos)
            pos = len(text) if nl < 0 else nl
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), m.start(), m.end()))
        pos = m.end()
    toks.append(("end", "", len(text), len(text)))
    return toks


def _literal_value(tok):
    if "/" in tok:
        a, b = tok.split("/")
        if Fraction(b) == 0:
            return None
        return Fraction(a) / Fraction(b)
    return Fraction(tok)


class _Parser:
    def __init__(self, text, toks=None, start=0):
        self.text = text
        self.toks = toks if toks is not None else tokenize(text)
        self.i = start

    def peek(self, k=0):
        return self.toks[self.i + k]

    def take(self, value=None, kind=None):
        tok = self.toks[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = repr(value) if value is not None else kind
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise DSLSyntaxError(f"expected {want}, found {got}", self.text, tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "sym":
            op = self.take()[1]
            right = self.term()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "sym":
            op = self.take()[1]
            right = self.factor()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def factor(self):
        tok = self.peek()
        if tok[1] == "-" and tok[0] == "sym":
            self.take()
            arg = self.factor()
            return Neg(arg, (tok[2], arg.span[1]))
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            e = self.take(kind="num")
            if "/" in e[1] and "." not in e[1]:
                # "x^2/3" lexes the literal 2/3; split it back into 2, /, 3
                a, b = e[1].split("/")
                cut = e[2] + len(a)
                self.toks[self.i:self.i] = [("sym", "/", cut, cut + 1), ("num", b, cut + 1, e[3])]
                e = ("num", a, e[2], cut)
            if not e[1].isdigit():
                raise DSLSyntaxError("exponent must be a natural number", self.text, e[2])
            return Pow(base, int(e[1]), (base.span[0], e[3]))
        return base

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            v = _literal_value(tok[1])
            if v is None:
                raise DSLSyntaxError("zero denominator in literal", self.text, tok[2])
            return Lit(v, (tok[2], tok[3]))
        if tok[0] == "ident":
            self.take()
            if self.peek()[1] != "(":
                if tok[1] == "i":
                    return Lit(GaussianRational(0, 1), (tok[2], tok[3]))
                return Var(tok[1], (tok[2], tok[3]))
            self.take("(")
            args = [self.expr()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.expr())
            close = self.take(")")
            span = (tok[2], close[3])
            name = tok[1]
            if name == "diff":
                if len(args) != 2 or not isinstance(args[1], Var):
                    raise DSLSyntaxError("diff takes an expression and a coordinate", self.text, tok[2])
                return Derive(args[0], args[1].name, span)
            if name == "inv":
                if len(args) != 2:
                    raise DSLSyntaxError("inv takes an expression and a bound", self.text, tok[2])
                eps = _const_value(args[1])
                if eps is None or not isinstance(eps, Fraction) or eps <= 0:
                    raise DSLSyntaxError("inv needs a positive rational bound", self.text, args[1].span[0])
                return InvertOn(args[0], eps, span)
            return Call(name, tuple(args), span)
        if tok[1] == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        got = "end of input" if tok[0] == "end" else repr(tok[1])
        raise DSLSyntaxError(f"unexpected {got}", self.text, tok[2])


def _const_value(node):
    """Exact value of a variable-free literal expression, else None."""
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Neg):
        v = _const_value(node.arg)
        return None if v is None else -v
    if isinstance(node, Pow):
        v = _const_value(node.base)
        return None if v is None else v ** node.exp
    if isinstance(node, BinOp):
        a, b = _const_value(node.left), _const_value(node.right)
        if a is None or b is None:
            return None
        if node.op == "/":
            return None if b == 0 else a / b
        return {"+": a + b, "-": a - b, "*": a * b}[node.op]
    return None


def parse(text):
    """Parse one expression."""
    p = _Parser(text)
    node = p.expr()
    tok = p.peek()
    if tok[0] != "end":
        raise DSLSyntaxError(f"unexpected {tok[1]!r} after expression", text, tok[2])
    return node


# ---------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node, prec=0):
    """Source text that parses back to ``node``."""
    if isinstance(node, Lit):
        v = node.value
        if isinstance(v, GaussianRational):
            if v == GaussianRational(0, 1):
                return "i"
            raise ValueError("only rational literals and i are printable")
        s = f"{v.numerator}" if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        if v < 0:
            return f"-{s[1:]}" if prec <= 2 else f"(-{s[1:]})"
        return s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        s = "-" + to_text(node.arg, 3)
        return s
    if isinstance(node, Pow):
        base = to_text(node.base, 4)
        if isinstance(node.base, Pow) or (isinstance(node.base, Lit) and not _is_atom_literal(node.base)):
            base = f"({base})"
        return f"{base}^{node.exp}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        s = f"{to_text(node.left, p)} {node.op} {to_text(node.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(node, Call):
        return f"{node.name}(" + ", ".join(to_text(a) for a in node.args) + ")"
    if isinstance(node, Derive):
        return f"diff({to_text(node.arg)}, {node.var})"
    if isinstance(node, InvertOn):
        return f"inv({to_text(node.arg)}, {to_text(Lit(node.eps))})"
    raise TypeError(type(node))


def _is_atom_literal(node):
    v = node.value
    return isinstance(v, GaussianRational) or (v >= 0 and v.denominator == 1)


def _lit_value(node):
    v = node.value
    return v if isinstance(v, GaussianRational) else Fraction(v)


# ---------------------------------------------------------------- compiler

@dataclass
class CompileReport:
    function: NoetherianFunction
    log: list
    expr: object = None
    coords: tuple = ()
    eps_decisions: list = field(default_factory=list)

    @property
    def params(self):
        return self.function.params

    @property
    def chain(self):
        return self.function.chain

    def to_dict(self):
        return {
            "expr": None if self.expr is None else to_text(self.expr),
            "params": {"n": self.params[0], "ell": self.params[1], "alpha": self.params[2], "beta": self.params[3]},
            "function": self.function.poly.trimmed().to_text(),
            "log": self.log,
            "eps": self.eps_decisions,
            "chain": self.chain.to_dict(),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def replay(log):
    """Parameters of every logged node recomputed from the formulas."""
    out = {}
    for entry in log:
        args = [out[a] for a in entry["args"]]
        op = entry["op"]
        if op in ("literal", "coordinate", "builtin", "reference"):
            out[entry["id"]] = tuple(entry["params"])
        elif op == "pow":
            n, l, a, b = args[0]
            out[entry["id"]] = (n, l, a, entry["k"] * b)
        elif op in ("neg", "scale"):
            out[entry["id"]] = args[0]
        elif op == "lift":
            out[entry["id"]] = args[1][:3] + args[0][3:]
        elif op == "union":
            out[entry["id"]] = closure.sequence_params("union", args[0][:3], args[1][:3]) + (None,)
        else:
            out[entry["id"]] = closure.sequence_params(op, *args)
    return out


class Compiler:
    """Compiles one expression on a fixed domain and basepoint."""

    def __init__(self, coords, domain, basepoint=None, eps_policy="auto", config=None, env=None):
        self.coords = tuple(coords)
        if domain.dim != len(self.coords):
            raise CompileError("domain dimension differs from the coordinate count")
        self.domain = domain
        self.basepoint = tuple(domain.centers if basepoint is None else (complex(b) for b in basepoint))
        if not domain.contains(np.array(self.basepoint)):
            raise CompileError("basepoint lies outside the domain", {"basepoint": list(self.basepoint)})
        self.eps_policy = eps_policy
        self.config = config or DEFAULT
        self.env = dict(env or {})
        self.log = []
        self.eps_decisions = []
        self._trivial = NoetherianChain(self.coords, [], domain, self.basepoint, [])

    def _record(self, op, f, args=(), **extra):
        entry = {"id": len(self.log), "op": op, "args": list(args), "params": list(f.params)}
        entry.update(extra)
        self.log.append(entry)
        f.node_id = entry["id"]
        return f

    def compile(self, node):
        f = self._compile(node)
        return CompileReport(f, self.log, node, self.coords, self.eps_decisions)

    # union of two functions, logged
    def _common(self, f, g):
        if f.chain is g.chain:
            return f, g
        chain, l1, l2 = closure.union(f.chain, g.chain)
        u = {"id": len(self.log), "op": "union", "args": [f.node_id, g.node_id],
             "params": list(chain.params) + [None]}
        self.log.append(u)
        return self._lift(f, chain, u["id"], l1), self._lift(g, chain, u["id"], l2)

    def _lift(self, f, chain, union_id, lift=None):
        g = lift(f) if lift else NoetherianFunction(chain, f.poly, f.beta)
        return self._record("lift", g, [f.node_id, union_id])

    def _compile(self, node):
        try:
            return self._dispatch(node)
        except CompileError:
            raise
        except PreconditionError as exc:
            raise CompileError(f"{exc} (at {to_text(node)!r})", {"span": list(node.span), "cause": exc.witness})

    def _dispatch(self, node):
        if isinstance(node, Lit):
            f = NoetherianFunction(self._trivial, Polynomial.const(_lit_value(node)), 0)
            return self._record("literal", f)
        if isinstance(node, Var):
            if node.name in self.coords:
                f = NoetherianFunction(self._trivial, Polynomial.var(node.name), 1)
                return self._record("coordinate", f, name=node.name)
            if node.name in self.env:
                f = self.env[node.name]
                chain = f.chain
                if chain.xvars != self.coords or not _box_inside(self.domain, chain.domain):
                    raise CompileError(f"{node.name!r} was declared on a domain not containing this one",
                                       {"span": list(node.span)})
                if chain.domain != self.domain or chain.basepoint != self.basepoint:
                    chain = closure.rebase(chain, self.basepoint, self.domain, config=self.config)
                f = NoetherianFunction(chain, f.poly, f.beta)
                return self._record("reference", f, name=node.name)
            raise CompileError(f"unknown identifier {node.name!r}", {"span": list(node.span)})
        if isinstance(node, Neg):
            a = self._compile(node.arg)
            return self._record("neg", closure.scale(a, -1), [a.node_id])
        if isinstance(node, Pow):
            a = self._compile(node.base)
            poly = a.poly ** node.exp
            f = NoetherianFunction(a.chain, poly, a.beta * node.exp)
            return self._record("pow", f, [a.node_id], k=node.exp)
        if isinstance(node, BinOp):
            a = self._compile(node.left)
            if node.op == "/":
                b = self._compile(node.right)
                if b.poly.is_constant():
                    c = b.poly.constant_term()
                    if c == 0:
                        raise CompileError("division by zero", {"span": list(node.span)})
                    return self._record("scale", closure.scale(a, 1 / c), [a.node_id])
                b = self._invert(b, None, node)
                a, b = self._common(a, b)
                return self._record("mul", closure.combine(a, b, "mul"), [a.node_id, b.node_id])
            b = self._compile(node.right)
            a, b = self._common(a, b)
            op = {"+": "add", "-": "sub", "*": "mul"}[node.op]
            return self._record(op, closure.combine(a, b, op), [a.node_id, b.node_id])
        if isinstance(node, InvertOn):
            return self._invert(self._compile(node.arg), node.eps, node)
        if isinstance(node, Derive):
            if node.var not in self.coords:
                raise CompileError(f"diff variable {node.var!r} is not a coordinate", {"span": list(node.span)})
            a = self._compile(node.arg)
            return self._record("derivative", closure.derivative(a, node.var), [a.node_id], var=node.var)
        if isinstance(node, Call):
            return self._call(node)
        raise TypeError(type(node))

    def _invert(self, f, eps, node):
        policy = self.eps_policy
        if eps is not None:
            out = closure.invert(f, eps=float(eps), config=self.config)
            how = "explicit"
        elif policy == "auto":
            out = closure.invert(f, config=self.config)
            how = "auto"
        elif policy == "assume":
            out = closure.invert(f, assume=True, config=self.config)
            how = "assumed"
        elif isinstance(policy, (int, float, Fraction)):
            out = closure.invert(f, eps=float(policy), config=self.config)
            how = "explicit"
        else:
            raise CompileError("division without a certifiable lower bound", {"span": list(node.span)})
        self.eps_decisions.append({"at": to_text(node), "policy": how, **{k: v for k, v in out.report.items()}})
        return self._record("invert", out, [f.node_id], eps=out.report.get("eps"))

    def _call(self, node):
        if node.name in SPECIAL_FORMS:
            raise CompileError(f"{node.name} used with the wrong arguments", {"span": list(node.span)})
        if node.name not in FUNCTIONS:
            raise CompileError(f"unknown function {node.name!r}", {"span": list(node.span), "known": sorted(FUNCTIONS)})
        entry = catalog_builtin(node.name)
        if len(node.args) != len(entry.coords):
            raise CompileError(f"{node.name} takes {len(entry.coords)} argument(s)", {"span": list(node.span)})
        if not node.is_compose and all(a.name in self.coords for a in node.args):
            names = [a.name for a in node.args]
            idx = [self.coords.index(v) for v in names]
            sub = ComplexBox([self.domain.centers[k] for k in idx], [self.domain.radii[k] for k in idx])
            chain, exports = entry.build(coords=names, basepoint=[self.basepoint[k] for k in idx], domain=sub,
                                         config=self.config)
            if tuple(names) != self.coords:
                chain = closure.lift_coordinates(chain, self.coords, self.domain, self.basepoint)
            f = NoetherianFunction(chain, exports[node.name], 1)
            return self._record("builtin", f, name=node.name)
        inner = [self._compile(a) for a in node.args]
        for k in range(1, len(inner)):
            if inner[k].chain is inner[0].chain:
                continue
            a, b = self._common(inner[0], inner[k])
            for m in range(1, k):
                inner[m] = self._lift(inner[m], a.chain, self.log[-3]["id"])
            inner[0], inner[k] = a, b
        image0, box = self._image_box(inner)
        chain2, exports = entry.build(basepoint=image0, domain=box, config=self.config)
        g = NoetherianFunction(chain2, exports[node.name], 1)
        self._record("builtin", g, name=node.name)
        out = closure.compose(inner, g, config=self.config)
        ids = [f.node_id for f in inner]
        widest = ids[int(np.argmax([f.beta for f in inner]))]
        return self._record("compose", out, [widest, g.node_id], inner=ids)

    def _image_box(self, inner):
        """Polydisc around the image of the basepoint covering the sampled image."""
        image0 = [complex(f.value_at_basepoint()) for f in inner]
        radii = []
        for f, c in zip(inner, image0):
            _, vals = closure.sample_function(f, 1, self.config)
            spread = float(np.max(np.abs(vals - c))) if len(vals) else 0.0
            radii.append(max(1.25 * spread, 1e-3))
        return image0, ComplexBox(image0, radii)


def _box_inside(inner, outer):
    return all(abs(a - b) + r <= R * (1 + 1e-12)
               for a, r, b, R in zip(inner.centers, inner.radii, outer.centers, outer.radii))


def compile_expr(expr, coords, domain, basepoint=None, eps_policy="auto", config=None, env=None):
    """Compile an expression (text or AST) into a CompileReport."""
    node = parse(expr) if isinstance(expr, str) else expr
    return Compiler(coords, domain, basepoint, eps_policy, config, env).compile(node)


# ---------------------------------------------------------------- programs

@dataclass
class Declaration:
    name: str
    expr: object
    coords: tuple
    centers: tuple
    radii: tuple
    basepoint: tuple
    line: int

    @property
    def domain(self):
        return ComplexBox([complex(c) for c in self.centers], [float(r) for r in self.radii])

    def to_text(self):
        dom = "; ".join(f"{v}: {_num_text(c)}, {_num_text(r)}" for v, c, r in zip(self.coords, self.centers, self.radii))
        bp = "; ".join(f"{v}: {_num_text(b)}" for v, b in zip(self.coords, self.basepoint))
        return f"let {self.name} = {to_text(self.expr)} on domain({dom}) at basepoint({bp})"


def _num_text(v):
    if isinstance(v, GaussianRational):
        parts = []
        if v.re:
            parts.append(to_text(Lit(v.re)))
        if v.im:
            im = "i" if v.im == 1 else f"{to_text(Lit(v.im))}*i"
            parts.append(im)
        return " + ".join(parts) if parts else "0"
    return to_text(Lit(Fraction(v)))


def _constant_expr(parser, stop):
    """Parse a constant expression and return its exact value."""
    start = parser.peek()[2]
    node = parser.expr()
    v = _const_value(node)
    if v is None:
        raise DSLSyntaxError("expected a constant", parser.text, start)
    if parser.peek()[1] not in stop:
        tok = parser.peek()
        raise DSLSyntaxError(f"unexpected {tok[1]!r}", parser.text, tok[2])
    return v


def parse_program(text):
    """Declarations of a program file, in order."""
    decls = []
    toks = tokenize(text)
    lines = {}
    for k, tok in enumerate(toks):
        lines.setdefault(text.count("\n", 0, tok[2]), []).append(k)
    p = _Parser(text, toks)
    while p.peek()[0] != "end":
        tok = p.take("let")
        line = text.count("\n", 0, tok[2]) + 1
        name = p.take(kind="ident")[1]
        p.take("=")
        expr = p.expr()
        p.take("on")
        p.take("domain")
        p.take("(")
        coords, centers, radii = [], [], []
        while True:
            coords.append(p.take(kind="ident")[1])
            p.take(":")
            centers.append(_constant_expr(p, (",",)))
            p.take(",")
            r = _constant_expr(p, (";", ")"))
            if isinstance(r, GaussianRational) or r <= 0:
                raise DSLSyntaxError("radius must be a positive rational", text, p.peek()[2])
            radii.append(r)
            if p.take()[1] == ")":
                break
        basepoint = list(centers)
        if p.peek()[1] == "at":
            p.take()
            p.take("basepoint")
            p.take("(")
            while True:
                var = p.take(kind="ident")
                if var[1] not in coords:
                    raise DSLSyntaxError(f"basepoint names unknown coordinate {var[1]!r}", text, var[2])
                p.take(":")
                basepoint[coords.index(var[1])] = _constant_expr(p, (";", ")"))
                if p.take()[1] == ")":
                    break
        nxt = p.peek()
        if nxt[0] != "end" and text.count("\n", 0, nxt[2]) + 1 == line:
            raise DSLSyntaxError("one declaration per line", text, nxt[2])
        decls.append(Declaration(name, expr, tuple(coords), tuple(centers), tuple(radii), tuple(basepoint), line))
    return decls


def compile_program(text, eps_policy="auto", config=None):
    """Compile every declaration; later lines may use earlier names on the same domain."""
    env, out = {}, {}
    for d in parse_program(text):
        rep = compile_expr(d.expr, d.coords, d.domain, [complex(b) for b in d.basepoint], eps_policy, config, env)
        env[d.name] = rep.function
        out[d.name] = rep
    return out


__all__ = ["parse", "to_text", "compile_expr", "parse_program", "compile_program", "replay", "CompileReport",
           "Lit", "Var", "Neg", "BinOp", "Pow", "Call", "Derive", "InvertOn", "DSLSyntaxError", "CompileError"]
