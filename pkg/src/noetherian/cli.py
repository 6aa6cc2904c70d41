"""Command line front end: ``noether <command> ...``.

Function and set arguments are DSL program files (or program text given
inline).  ``--name`` picks a declaration; the last one is used by default.
Reports go to stdout (or ``--out``) as JSON or CSV.  Exit status is 0 on
success, 2 when a precondition refuses the input and 1 on any other
failure; failures also print an error object on stderr.
"""

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import NoetherianError

EXIT_OK, EXIT_INTERNAL, EXIT_REFUSED = 0, 1, 2


class UsageError(NoetherianError):
    kind = "usage"


def parse_complex(text):
    s = text.strip().replace(" ", "").replace("I", "j").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def parse_point(text):
    return [parse_complex(c) for c in text.split(",") if c.strip()]


def parse_path(text):
    """``a,b; c,d; ...`` into a list of points."""
    pts = [parse_point(p) for p in text.split(";") if p.strip()]
    if not pts:
        raise UsageError("empty path")
    return pts


def parse_heights(text):
    """``1..64``, ``1,2,8`` or a mix of both."""
    out = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..", 1)
            out.update(range(int(a), int(b) + 1))
        else:
            out.add(int(part))
    if not out or min(out) < 1:
        raise UsageError("heights must be positive integers", {"heights": text})
    return sorted(out)


def parse_box(text):
    """``lo:hi,lo:hi`` with rational endpoints."""
    box = []
    for part in text.split(","):
        if ":" not in part:
            raise UsageError(f"box interval needs lo:hi, got {part!r}")
        lo, hi = (Fraction(s.strip()) for s in part.split(":", 1))
        if lo > hi:
            raise UsageError(f"empty box interval {part!r}")
        box.append((lo, hi))
    return box


def read_program(source):
    if os.path.exists(source):
        with open(source) as fh:
            return fh.read()
    if source.lstrip().startswith("let "):
        return source
    raise UsageError(f"no such program file: {source!r}")


def load_function(source, name=None, config=None):
    """Compiled declaration ``name`` (default: the last) and its declaration."""
    from .dsl import compile_program, parse_program

    text = read_program(source)
    decls = parse_program(text)
    if not decls:
        raise UsageError("program declares nothing")
    reports = compile_program(text, config=config)
    name = name or decls[-1].name
    if name not in reports:
        raise UsageError(f"no declaration named {name!r}", {"names": list(reports)})
    decl = next(d for d in decls if d.name == name)
    return reports[name], decl


def as_generator(func):
    """The polynomial itself when ``func`` does not use any chain member."""
    xvars = func.chain.xvars
    poly = func.poly.trimmed()
    if set(poly.used_variables()) <= set(xvars):
        return poly.with_variables(xvars)
    return func


def load_set(source, names=None, config=None):
    from .weierstrass import AnalyticSet

    wanted = [s for s in (names or "").split(",") if s] or [None]
    gens, variables, decl = [], None, None
    for nm in wanted:
        rep, decl = load_function(source, nm, config)
        if variables is None:
            variables = rep.function.chain.xvars
        elif rep.function.chain.xvars != variables:
            raise UsageError("set generators must share coordinates")
        gens.append(as_generator(rep.function))
    return AnalyticSet(gens, variables, config), decl


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def _flat_csv(report):
    rows = ["key,value"]
    for k, v in report.items():
        v = _jsonable(v)
        if isinstance(v, (dict, list)):
            v = json.dumps(v, sort_keys=True)
            v = '"' + v.replace('"', '""') + '"'
        rows.append(f"{k},{v}")
    return "\n".join(rows) + "\n"


# commands ---------------------------------------------------------------

def cmd_compile(args, config):
    from .dsl import compile_program

    reports = compile_program(read_program(args.program), config=config)
    return {"declarations": {k: r.to_dict() for k, r in reports.items()}}


def cmd_eval(args, config):
    from .evaluate import make_evaluator

    rep, _ = load_function(args.program, args.name, config)
    f = rep.function
    path = parse_path(args.path)
    for p in path:
        if len(p) != f.chain.n:
            raise UsageError(f"path points need {f.chain.n} coordinates", {"point": p})
    ev = make_evaluator(f.chain, config)
    state = ev.base_state()
    rows = []
    for p in path:
        state = ev.step_segment(state, p)
        if config.precision > 53:
            value = complex(ev.function_value(f, state))
        else:
            value = complex(f.numeric()(np.concatenate([state.position, state.values])))
        rows.append({"point": [complex(v) for v in state.position], "value": value,
                     "members": [complex(v) for v in state.values], "error_estimate": state.error})
    return {"function": rep.to_dict()["function"], "params": rep.to_dict()["params"], "path": rows,
            "value": rows[-1]["value"], "precision": config.precision}


def _disc(values):
    c, r = parse_complex(values[0]), float(values[1])
    from .bernstein import Disc

    if not r > 0:
        raise UsageError("disc radius must be positive")
    return Disc(c, r)


def _ball(values):
    center, r = parse_point(values[0]), float(values[1])
    if not r > 0:
        raise UsageError("ball radius must be positive")
    return center, r


def cmd_bernstein(args, config):
    from .bernstein import bernstein_index, check_zero_bound, count_zeros_perturbed, directional_bernstein

    rep, _ = load_function(args.program, args.name, config)
    f = rep.function
    if f.chain.n == 1:
        if not args.disc:
            raise UsageError("one-variable functions need --disc CENTER RADIUS")
        D = _disc(args.disc)
        out = {"disc": [D.center, D.radius], "index": bernstein_index(f, D, gap=args.gap, config=config).to_dict()}
        if args.epsilon is not None:
            out["zero_bound"] = check_zero_bound(f, D, args.epsilon, config=config)
        out["zeros_in_inner_disc"] = count_zeros_perturbed(f, D.shrink(args.gap), config)[0]
        return out
    if not args.ball:
        raise UsageError("functions of several variables need --ball CENTER RADIUS")
    center, r = _ball(args.ball)
    best = directional_bernstein(f, center, r, gap=args.gap, config=config)
    return {"ball": [center, r], "index": best.to_dict()}


def cmd_zeros(args, config):
    from .bernstein import count_zeros_disc

    rep, _ = load_function(args.program, args.name, config)
    f = rep.function
    if args.curve:
        from .curve_ode import AlgebraicCurve

        if not args.ball:
            raise UsageError("--curve needs --ball CENTER RADIUS")
        from .curve_ode import count_zeros_on_curve

        center, r = _ball(args.ball)
        curve = AlgebraicCurve([args.curve], f.chain.xvars)
        out = count_zeros_on_curve(f, curve, center, r, eps=args.epsilon or 1.0, config=config)
        return {"curve": args.curve, "ball": [center, r], **out}
    if not args.disc:
        raise UsageError("zeros needs --disc CENTER RADIUS or --curve")
    if f.chain.n != 1:
        raise UsageError("--disc counts zeros of one-variable functions")
    D = _disc(args.disc)
    return {"disc": [D.center, D.radius], "count": count_zeros_disc(f, D, config=config)}


def cmd_polydisc(args, config):
    from .weierstrass import algebraic_polydisc, hypersurface_polydisc, verify_polydisc

    X, _ = load_set(args.program, args.name, config)
    if not args.ball:
        raise UsageError("polydisc needs --ball CENTER RADIUS")
    center, r = _ball(args.ball)
    if len(center) != X.n:
        raise UsageError(f"ball center needs {X.n} coordinates")
    if X.is_algebraic and len(X.functions) == 1:
        P = algebraic_polydisc(X, center, r, config=config)
        method = "algebraic"
    else:
        P = hypersurface_polydisc(X, center, r, config=config)
        method = "hypersurface"
    check = verify_polydisc(X, P)
    return {"method": method, "polydisc": P.to_dict(), "verified": bool(check["ok"]), "margin": check["margin"]}


def cmd_census(args, config):
    from .census import census_report

    X, decl = load_set(args.program, args.name, config)
    if args.box:
        box = parse_box(args.box)
    else:
        # real part of the domain, half its radius on each side
        box = [(Fraction(complex(c).real).limit_denominator(10 ** 6) - Fraction(r) / 2,
                Fraction(complex(c).real).limit_denominator(10 ** 6) + Fraction(r) / 2)
               for c, r in zip(decl.centers, decl.radii)]
    if len(box) != X.n:
        raise UsageError(f"box needs {X.n} intervals")
    heights = parse_heights(args.heights)
    rep = census_report(X, box, heights, eps=args.epsilon, config=config, explore_tree=not args.no_tree)
    rep["box"] = [[str(lo), str(hi)] for lo, hi in box]
    return rep


def cmd_check(args, config):
    from .selfcheck import run_checks

    results = run_checks(config, only=args.only)
    return {"checks": results, "passed": sum(r["ok"] for r in results), "failed": sum(not r["ok"] for r in results)}


COMMANDS = {"compile": cmd_compile, "eval": cmd_eval, "bernstein": cmd_bernstein, "zeros": cmd_zeros,
            "polydisc": cmd_polydisc, "census": cmd_census, "check": cmd_check}


def _common_flags(suppress):
    # subcommands suppress their defaults so flags given before the subcommand survive
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="working precision in bits", **kw)
    common.add_argument("--seed", type=int, help="seed for every randomized step", **kw)
    common.add_argument("--config", help="key = value config file (default: $NOETHER_CONFIG)", **kw)
    common.add_argument("--out", help="write the report here instead of stdout", **kw)
    common.add_argument("--format", choices=("json", "csv"), **(kw or {"default": "json"}))
    return common


def build_parser():
    common = _common_flags(True)
    parser = argparse.ArgumentParser(prog="noether", parents=[_common_flags(False)],
                                     description="Noetherian functions: chains, indices, polydiscs, counts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="compile a DSL program")
    p.add_argument("program")

    p = sub.add_parser("eval", parents=[common], help="continue a function along a path")
    p.add_argument("program")
    p.add_argument("path", help="points separated by ';', coordinates by ','")
    p.add_argument("--name")

    p = sub.add_parser("bernstein", parents=[common], help="Bernstein index on a disc or ball")
    p.add_argument("program")
    p.add_argument("--name")
    p.add_argument("--disc", nargs=2, metavar=("CENTER", "RADIUS"))
    p.add_argument("--ball", nargs=2, metavar=("CENTER", "RADIUS"), help="CENTER as a,b,...")
    p.add_argument("--gap", type=float, default=2.0)
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("zeros", parents=[common], help="count zeros in a disc or on a curve")
    p.add_argument("program")
    p.add_argument("--name")
    p.add_argument("--disc", nargs=2, metavar=("CENTER", "RADIUS"))
    p.add_argument("--curve", help="polynomial defining a plane curve")
    p.add_argument("--ball", nargs=2, metavar=("CENTER", "RADIUS"))
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("polydisc", parents=[common], help="verified Weierstrass polydisc in a ball")
    p.add_argument("program")
    p.add_argument("--name", help="comma-separated generators (default: last declaration)")
    p.add_argument("--ball", nargs=2, metavar=("CENTER", "RADIUS"))

    p = sub.add_parser("census", parents=[common], help="rational points of bounded height")
    p.add_argument("program")
    p.add_argument("--name", help="comma-separated generators (default: last declaration)")
    p.add_argument("--box", help="lo:hi,lo:hi,... (default: half the domain radius)")
    p.add_argument("--heights", default="1..16")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--no-tree", action="store_true", help="skip the exploration tree")

    p = sub.add_parser("check", parents=[common], help="run the built-in property checks")
    p.add_argument("--only", help="comma-separated check names")
    return parser


def make_config(args):
    try:
        config = RunConfig.load(args.config)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    changes = {}
    if args.precision is not None:
        changes["precision"] = args.precision
    if args.seed is not None:
        changes["seed"] = args.seed
    config = config.replace(**changes)
    bad = {k: v for k, v in config.constants().items() if v < 0}
    if config.precision < 53 or bad:
        raise UsageError("invalid configuration", {"precision": config.precision, "negative": bad})
    return config


def render(report, fmt):
    if fmt == "csv":
        if "rows" in report:
            from .census import rows_to_csv

            return rows_to_csv(report["rows"])
        return _flat_csv(report)
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = make_config(args)
        report = COMMANDS[args.command](args, config)
        report = {"command": args.command, **report, "config": {"constants": config.constants(),
                  "precision": config.precision, "seed": config.seed}}
        text = render(report, args.format)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.command == "check" and report["failed"]:
            return EXIT_INTERNAL
        return EXIT_OK
    except NoetherianError as exc:
        sys.stderr.write(json.dumps(_jsonable(exc.to_dict()), sort_keys=True) + "\n")
        return EXIT_REFUSED
    except Exception as exc:
        err = {"error": "internal", "type": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
